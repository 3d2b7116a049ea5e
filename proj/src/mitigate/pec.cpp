#include <cmath>
#include <random>
#include <stdexcept>
#include <unordered_map>

#include "qem/mitigate.hpp"

namespace qem::mitigate {

namespace {
std::vector<std::string> pauli_strings(int n) {
    const char letters[4] = {'I', 'X', 'Y', 'Z'};
    std::size_t count = std::size_t{1} << (2 * n);
    std::vector<std::string> out;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        std::string s(static_cast<std::size_t>(n), 'I');
        std::size_t v = k;
        for (int i = 0; i < n; ++i, v >>= 2) s[static_cast<std::size_t>(i)] = letters[v & 3];
        out.push_back(std::move(s));
    }
    return out;
}

struct Location {
    int instance;
    int offset;  // first qubit of the target register
};

std::vector<Location> noise_locations(const ParamCircuit& c, const NoisySpec& noise) {
    std::vector<Location> out;
    int k = noise.instances(c.num_layers());
    if (noise.kind == densim::NoiseKind::none) return out;
    for (int i = 0; i < k; ++i) {
        if (noise.kind == densim::NoiseKind::local_depolarizing)
            for (int q = 0; q < c.n(); ++q) out.push_back({i, q});
        else
            out.push_back({i, 0});
    }
    return out;
}

void check_decomps(const ParamCircuit& c, const NoisySpec& noise, const std::vector<PECDecomposition>& d,
                   const std::vector<Location>& locs) {
    if (d.size() != locs.size())
        throw std::invalid_argument("expected " + std::to_string(locs.size()) + " decompositions, got " +
                                    std::to_string(d.size()));
    int want = noise.kind == densim::NoiseKind::global_depolarizing ? c.n() : 1;
    for (const auto& x : d)
        if (x.n_target != want) throw std::invalid_argument("decomposition target size does not match noise");
}

// Runs the noisy circuit; after instance i, hook(i, m) is called.
template <class Hook>
Matrix run_with_hook(const ParamCircuit& c, const NoisySpec& noise, const QuantumState& rho_in, Hook&& hook) {
    if (c.n() != rho_in.n()) throw std::invalid_argument("circuit and state sizes differ");
    c.check_bound();
    noise.validate(c.n());
    Matrix m = rho_in.rho();
    int inst = 0;
    if (noise.leading_layer) {
        densim::ops::apply_noise(m, noise, c.n());
        hook(inst++, m);
    }
    for (const auto& layer : c.layers()) {
        for (const auto& g : layer) densim::ops::apply_gate(m, g, c.theta());
        densim::ops::apply_noise(m, noise, c.n());
        hook(inst++, m);
    }
    return m;
}
}  // namespace

void PECDecomposition::apply(Matrix& m, int offset) const {
    Matrix acc = Matrix::Zero(m.rows(), m.cols());
    for (std::size_t a = 0; a < basis.size(); ++a) {
        if (q_alpha[a] == 0.0) continue;
        Matrix t = m;
        densim::ops::apply_pauli(t, basis[a], offset);
        acc += q_alpha[a] * t;
    }
    m = std::move(acc);
}

PECDecomposition pec_decompose_depolarizing(int n_target_qubits, double p) {
    if (n_target_qubits < 1) throw std::invalid_argument("target register needs >= 1 qubit");
    if (!(p >= 0.0 && p < 1.0)) throw std::domain_error("depolarizing channel with p outside [0,1) has no inverse");
    PECDecomposition d;
    d.n_target = n_target_qubits;
    d.p = p;
    d.basis = pauli_strings(n_target_qubits);
    const double dim2 = static_cast<double>(d.basis.size());
    const double x = p / (dim2 * (1.0 - p));
    d.q_alpha.assign(d.basis.size(), -x);
    d.q_alpha[0] = 1.0 + (dim2 - 1.0) * x;
    d.G_N = 0.0;
    d.gamma = 0.0;
    for (double q : d.q_alpha) {
        d.G_N += std::abs(q);
        d.gamma += q * q;
    }
    for (double q : d.q_alpha) {
        d.p_alpha.push_back(std::abs(q) / d.G_N);
        d.signs.push_back(q < 0 ? -1 : 1);
    }
    return d;
}

std::vector<PECDecomposition> pec_decompositions_for(const ParamCircuit& c, const NoisySpec& noise) {
    std::vector<PECDecomposition> out;
    auto locs = noise_locations(c, noise);
    if (noise.kind == densim::NoiseKind::local_depolarizing) {
        auto probs = noise.effective_local(c.n());
        for (const auto& l : locs) out.push_back(pec_decompose_depolarizing(1, probs[static_cast<std::size_t>(l.offset)]));
    } else if (noise.kind == densim::NoiseKind::global_depolarizing) {
        double p = noise.effective_global();
        for (std::size_t i = 0; i < locs.size(); ++i) out.push_back(pec_decompose_depolarizing(c.n(), p));
    }
    return out;
}

double pec_gamma_total(const std::vector<PECDecomposition>& decomps) {
    double g = 1.0;
    for (const auto& d : decomps) g *= d.gamma;
    return g;
}

double pec_exact_expectation(const ParamCircuit& c, const NoisySpec& noise,
                             const std::vector<PECDecomposition>& decomps, const Observable& obs,
                             const QuantumState& rho_in) {
    auto locs = noise_locations(c, noise);
    check_decomps(c, noise, decomps, locs);
    std::size_t next = 0;
    Matrix m = run_with_hook(c, noise, rho_in, [&](int inst, Matrix& x) {
        while (next < locs.size() && locs[next].instance == inst) {
            decomps[next].apply(x, locs[next].offset);
            ++next;
        }
    });
    return densim::expectation(m, obs.matrix());
}

PECResult pec_estimate(const ParamCircuit& c, const NoisySpec& noise, const std::vector<PECDecomposition>& decomps,
                       const Observable& obs, const QuantumState& rho_in, std::size_t n_samples, Rng& rng) {
    if (n_samples < 1) throw std::invalid_argument("need at least one sample");
    auto locs = noise_locations(c, noise);
    check_decomps(c, noise, decomps, locs);

    std::vector<std::discrete_distribution<int>> pick;
    double G_tot = 1.0;
    for (const auto& d : decomps) {
        pick.emplace_back(d.p_alpha.begin(), d.p_alpha.end());
        G_tot *= d.G_N;
    }

    // Each distinct choice of inserted Paulis is simulated once.
    std::unordered_map<std::string, double> cache;
    std::string key(locs.size(), '\0');
    double sum = 0.0, sumsq = 0.0;
    for (std::size_t s = 0; s < n_samples; ++s) {
        int sign = 1;
        for (std::size_t k = 0; k < locs.size(); ++k) {
            int a = pick[k](rng.engine());
            key[k] = static_cast<char>(a);
            sign *= decomps[k].signs[static_cast<std::size_t>(a)];
        }
        auto it = cache.find(key);
        if (it == cache.end()) {
            std::size_t next = 0;
            Matrix m = run_with_hook(c, noise, rho_in, [&](int inst, Matrix& x) {
                while (next < locs.size() && locs[next].instance == inst) {
                    const auto& d = decomps[next];
                    densim::ops::apply_pauli(x, d.basis[static_cast<unsigned char>(key[next])], locs[next].offset);
                    ++next;
                }
            });
            it = cache.emplace(key, densim::expectation(m, obs.matrix())).first;
        }
        double v = sign * G_tot * it->second;
        sum += v;
        sumsq += v * v;
    }

    PECResult r;
    r.n_samples = n_samples;
    r.G_tot = G_tot;
    double mean = sum / static_cast<double>(n_samples);
    r.sample_variance = n_samples > 1 ? std::max(0.0, (sumsq - sum * mean) / static_cast<double>(n_samples - 1)) : 0.0;
    r.std_error = std::sqrt(r.sample_variance / static_cast<double>(n_samples));

    auto noisy = densim::run_noisy_circuit(c, noise, rho_in);
    double cn = densim::expectation(noisy, obs);
    double var_noisy = std::max(0.0, densim::expectation(noisy.rho(), obs.matrix() * obs.matrix()) - cn * cn);
    r.estimate.protocol = "pec";
    r.estimate.value = mean;
    r.estimate.gamma = pec_gamma_total(decomps);
    r.estimate.variance = r.estimate.gamma * var_noisy;
    r.estimate.params = {{"G_tot", G_tot}, {"n_samples", static_cast<double>(n_samples)}, {"std_error", r.std_error}};
    return r;
}

}  // namespace qem::mitigate
