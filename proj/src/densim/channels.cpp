#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

#include "qem/densim.hpp"

namespace qem::densim {

namespace {
void check_prob(double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("probability " + std::to_string(p) + " outside [0,1]");
}

std::array<Eigen::Index, 4> two_qubit_indices(Eigen::Index base, Eigen::Index m0, Eigen::Index m1) {
    return {base, base | m0, base | m1, base | m0 | m1};
}
}  // namespace

namespace ops {

void apply_unitary_left(Matrix& m, const Matrix& u, int q0, int q1) {
    const Eigen::Index d = m.rows();
    const Eigen::Index cols = m.cols();
    if (q1 < 0) {
        const Eigen::Index mask = Eigen::Index{1} << q0;
        const cplx u00 = u(0, 0), u01 = u(0, 1), u10 = u(1, 0), u11 = u(1, 1);
        for (Eigen::Index c = 0; c < cols; ++c) {
            for (Eigen::Index i = 0; i < d; ++i) {
                if (i & mask) continue;
                cplx a = m(i, c), b = m(i | mask, c);
                m(i, c) = u00 * a + u01 * b;
                m(i | mask, c) = u10 * a + u11 * b;
            }
        }
        return;
    }
    const Eigen::Index m0 = Eigen::Index{1} << q0, m1 = Eigen::Index{1} << q1;
    for (Eigen::Index c = 0; c < cols; ++c) {
        for (Eigen::Index i = 0; i < d; ++i) {
            if ((i & m0) || (i & m1)) continue;
            auto idx = two_qubit_indices(i, m0, m1);
            cplx v[4] = {m(idx[0], c), m(idx[1], c), m(idx[2], c), m(idx[3], c)};
            for (int r = 0; r < 4; ++r)
                m(idx[r], c) = u(r, 0) * v[0] + u(r, 1) * v[1] + u(r, 2) * v[2] + u(r, 3) * v[3];
        }
    }
}

void apply_unitary_right_adjoint(Matrix& m, const Matrix& u, int q0, int q1) {
    const Eigen::Index d = m.cols();
    const Eigen::Index rows = m.rows();
    if (q1 < 0) {
        const Eigen::Index mask = Eigen::Index{1} << q0;
        const cplx c00 = std::conj(u(0, 0)), c01 = std::conj(u(0, 1));
        const cplx c10 = std::conj(u(1, 0)), c11 = std::conj(u(1, 1));
        for (Eigen::Index j = 0; j < d; ++j) {
            if (j & mask) continue;
            for (Eigen::Index r = 0; r < rows; ++r) {
                cplx a = m(r, j), b = m(r, j | mask);
                m(r, j) = a * c00 + b * c01;
                m(r, j | mask) = a * c10 + b * c11;
            }
        }
        return;
    }
    const Eigen::Index m0 = Eigen::Index{1} << q0, m1 = Eigen::Index{1} << q1;
    Eigen::Matrix4cd uc = u.conjugate();
    for (Eigen::Index j = 0; j < d; ++j) {
        if ((j & m0) || (j & m1)) continue;
        auto idx = two_qubit_indices(j, m0, m1);
        for (Eigen::Index r = 0; r < rows; ++r) {
            cplx v[4] = {m(r, idx[0]), m(r, idx[1]), m(r, idx[2]), m(r, idx[3])};
            for (int k = 0; k < 4; ++k)
                m(r, idx[k]) = v[0] * uc(k, 0) + v[1] * uc(k, 1) + v[2] * uc(k, 2) + v[3] * uc(k, 3);
        }
    }
}

void apply_gate(Matrix& m, const Gate& g, const std::vector<double>& theta) {
    if (g.kind == GateKind::I) return;
    Matrix u = gate_matrix(g, theta);
    int q1 = arity(g.kind) == 2 ? g.q1 : -1;
    apply_unitary_left(m, u, g.q0, q1);
    apply_unitary_right_adjoint(m, u, g.q0, q1);
}

void depolarize_qubit(Matrix& m, int q, double p) {
    check_prob(p);
    if (p == 0.0) return;
    const Eigen::Index d = m.rows();
    const Eigen::Index mask = Eigen::Index{1} << q;
    const double keep = 1.0 - p;
    for (Eigen::Index b = 0; b < d; ++b) {
        if (b & mask) continue;
        for (Eigen::Index a = 0; a < d; ++a) {
            if (a & mask) continue;
            cplx x00 = m(a, b), x11 = m(a | mask, b | mask);
            cplx t = 0.5 * p * (x00 + x11);
            m(a, b) = keep * x00 + t;
            m(a | mask, b | mask) = keep * x11 + t;
            m(a | mask, b) *= keep;
            m(a, b | mask) *= keep;
        }
    }
}

void depolarize_global(Matrix& m, double p) {
    check_prob(p);
    if (p == 0.0) return;
    const cplx tr = m.trace();
    m *= (1.0 - p);
    m.diagonal().array() += p * tr / static_cast<double>(m.rows());
}

void apply_pauli(Matrix& m, const std::string& pauli, int offset) {
    const Eigen::Index d = m.rows();
    int n = 0;
    while ((Eigen::Index{1} << n) < d) ++n;
    if (offset < 0 || offset + static_cast<int>(pauli.size()) > n) throw std::out_of_range("Pauli placement out of range");
    Eigen::Index flip = 0;
    std::vector<cplx> ph(static_cast<std::size_t>(d), cplx(1.0));
    for (int k = 0; k < static_cast<int>(pauli.size()); ++k) {
        const int q = offset + k;
        const char c = pauli[static_cast<std::size_t>(k)];
        if (c == 'I') continue;
        if (c == 'X' || c == 'Y') flip |= Eigen::Index{1} << q;
        for (Eigen::Index b = 0; b < d; ++b) {
            bool bit = (b >> q) & 1;
            if (c == 'Z' && bit) ph[static_cast<std::size_t>(b)] = -ph[static_cast<std::size_t>(b)];
            if (c == 'Y') ph[static_cast<std::size_t>(b)] *= bit ? cplx(0, -1) : cplx(0, 1);
        }
    }
    Matrix out(d, d);
    for (Eigen::Index b = 0; b < d; ++b)
        for (Eigen::Index a = 0; a < d; ++a)
            out(a, b) = ph[static_cast<std::size_t>(a ^ flip)] * m(a ^ flip, b ^ flip) * ph[static_cast<std::size_t>(b)];
    m = std::move(out);
}

void apply_noise(Matrix& m, const NoisySpec& noise, int n) {
    switch (noise.kind) {
        case NoiseKind::none:
            return;
        case NoiseKind::local_depolarizing: {
            auto probs = noise.effective_local(n);
            for (int q = 0; q < n; ++q) depolarize_qubit(m, q, probs[static_cast<std::size_t>(q)]);
            return;
        }
        case NoiseKind::global_depolarizing:
            depolarize_global(m, noise.effective_global());
            return;
    }
}

}  // namespace ops

NoisySpec NoisySpec::none() { return NoisySpec{}; }

NoisySpec NoisySpec::local(std::vector<double> probs) {
    NoisySpec s;
    s.kind = NoiseKind::local_depolarizing;
    for (double p : probs) check_prob(p);
    s.local_probs = std::move(probs);
    return s;
}

NoisySpec NoisySpec::uniform_local(int n, double p) {
    return local(std::vector<double>(static_cast<std::size_t>(n), p));
}

NoisySpec NoisySpec::global(double p) {
    check_prob(p);
    NoisySpec s;
    s.kind = NoiseKind::global_depolarizing;
    s.global_p = p;
    return s;
}

NoisySpec NoisySpec::boosted(double a) const {
    if (!(a >= 1.0)) throw std::invalid_argument("boost factor must be >= 1");
    NoisySpec s = *this;
    s.boost = boost * a;
    return s;
}

std::vector<double> NoisySpec::effective_local(int n) const {
    if (static_cast<int>(local_probs.size()) != n)
        throw std::invalid_argument("expected " + std::to_string(n) + " local probabilities, got " +
                                    std::to_string(local_probs.size()));
    std::vector<double> out(local_probs.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        double p = boost * local_probs[i];
        if (p > 1.0 + 1e-12) throw std::domain_error("boosted local probability exceeds 1");
        out[i] = std::min(p, 1.0);
    }
    return out;
}

double NoisySpec::effective_global() const {
    double p = boost * global_p;
    if (p > 1.0 + 1e-12) throw std::domain_error("boosted global probability exceeds 1");
    return std::min(p, 1.0);
}

double NoisySpec::q(int n) const {
    switch (kind) {
        case NoiseKind::none:
            return 1.0;
        case NoiseKind::local_depolarizing: {
            double q = 0.0;
            for (double p : effective_local(n)) q = std::max(q, 1.0 - p);
            return q;
        }
        case NoiseKind::global_depolarizing:
            return 1.0 - effective_global();
    }
    return 1.0;
}

void NoisySpec::validate(int n) const {
    if (!(boost >= 1.0)) throw std::invalid_argument("boost factor must be >= 1");
    if (kind == NoiseKind::local_depolarizing) {
        for (double p : local_probs) check_prob(p);
        (void)effective_local(n);
    } else if (kind == NoiseKind::global_depolarizing) {
        check_prob(global_p);
        (void)effective_global();
    }
}

QuantumState apply_unitary_layer(const QuantumState& s, const Layer& layer, const std::vector<double>& theta) {
    Matrix m = s.rho();
    for (const auto& g : layer) {
        if (g.q0 >= s.n() || (arity(g.kind) == 2 && (g.q1 < 0 || g.q1 >= s.n())))
            throw std::out_of_range("gate acts outside the register");
        ops::apply_gate(m, g, theta);
    }
    return QuantumState::unchecked(std::move(m));
}

QuantumState apply_local_depolarizing(const QuantumState& s, const std::vector<double>& probs) {
    if (static_cast<int>(probs.size()) != s.n()) throw std::invalid_argument("one probability per qubit required");
    for (double p : probs) check_prob(p);
    Matrix m = s.rho();
    for (int q = 0; q < s.n(); ++q) ops::depolarize_qubit(m, q, probs[static_cast<std::size_t>(q)]);
    return QuantumState::unchecked(std::move(m));
}

QuantumState apply_global_depolarizing(const QuantumState& s, double p) {
    Matrix m = s.rho();
    ops::depolarize_global(m, p);
    return QuantumState::unchecked(std::move(m));
}

QuantumState run_circuit(const ParamCircuit& c, const QuantumState& rho_in) {
    return run_noisy_circuit(c, NoisySpec::none(), rho_in);
}

QuantumState run_noisy_circuit(const ParamCircuit& c, const NoisySpec& noise, const QuantumState& rho_in) {
    if (c.n() != rho_in.n()) throw std::invalid_argument("circuit and state sizes differ");
    c.check_bound();
    noise.validate(c.n());
    Matrix m = rho_in.rho();
    if (noise.leading_layer) ops::apply_noise(m, noise, c.n());
    for (const auto& layer : c.layers()) {
        for (const auto& g : layer) ops::apply_gate(m, g, c.theta());
        ops::apply_noise(m, noise, c.n());
    }
    return QuantumState::unchecked(std::move(m));
}

double expectation(const Matrix& rho, const Matrix& obs) {
    if (rho.rows() != obs.rows() || rho.cols() != obs.cols()) throw std::invalid_argument("dimension mismatch");
    cplx v = rho.cwiseProduct(obs.transpose()).sum();
    double scale = std::max(1.0, obs.cwiseAbs().maxCoeff());
    if (std::abs(v.imag()) > 1e-10 * scale) throw std::domain_error("expectation has a non-negligible imaginary part");
    return v.real();
}

double expectation(const QuantumState& s, const Observable& obs) {
    if (s.n() != obs.n()) throw std::invalid_argument("state and observable sizes differ");
    return expectation(s.rho(), obs.matrix());
}

}  // namespace qem::densim
