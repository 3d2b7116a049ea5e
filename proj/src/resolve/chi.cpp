#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "qem/resolve.hpp"

namespace qem::resolve {

namespace {
using Kind = Protocol::Kind;

struct Level {
    double value;
    double variance;  // per-shot variance of O
    QuantumState state;
};

Level measure(const ParamCircuit& c, const NoisySpec& noise, const QuantumState& rho_in, const Observable& obs) {
    QuantumState s = densim::run_noisy_circuit(c, noise, rho_in);
    double v = densim::expectation(s, obs);
    double v2 = densim::expectation(s.rho(), obs.matrix() * obs.matrix());
    return {v, std::max(0.0, v2 - v * v), std::move(s)};
}

std::uint64_t shots_or_max(double delta, double var, double precision) {
    if (delta == 0.0) return std::numeric_limits<std::uint64_t>::max();
    return shots_to_resolve(delta, var, precision);
}

ResolvabilityReport build_report(double dn, double dm, double var_n, double var_m, double gamma_fallback,
                                 double precision) {
    if (dn == 0.0) throw std::domain_error("noisy cost difference is zero");
    ResolvabilityReport r;
    r.delta_noisy = dn;
    r.delta_mitigated = dm;
    r.gamma = var_n > 0.0 ? var_m / var_n : gamma_fallback;
    r.chi = (dm / dn) * (dm / dn) / r.gamma;
    if (var_n > 0.0) {
        r.n_noisy = shots_or_max(dn, var_n, precision);
        r.n_em = shots_or_max(dm, var_m, precision);
        r.shot_ratio = static_cast<double>(r.n_noisy) / static_cast<double>(r.n_em);
    }
    return r;
}
}  // namespace

Protocol Protocol::parse(const std::string& name) {
    Protocol p;
    if (name == "identity") p.kind = Kind::identity;
    else if (name == "zne_richardson") p.kind = Kind::zne_richardson;
    else if (name == "zne_exp") p.kind = Kind::zne_exp;
    else if (name == "zne_nibp") p.kind = Kind::zne_nibp;
    else if (name == "vd_a") p.kind = Kind::vd_a;
    else if (name == "vd_b") p.kind = Kind::vd_b;
    else if (name == "pec") p.kind = Kind::pec;
    else if (name == "linear") p.kind = Kind::linear;
    else throw std::invalid_argument("unknown protocol '" + name + "'");
    return p;
}

std::string Protocol::name() const {
    switch (kind) {
        case Kind::identity: return "identity";
        case Kind::zne_richardson: return "zne_richardson";
        case Kind::zne_exp: return "zne_exp";
        case Kind::zne_nibp: return "zne_nibp";
        case Kind::vd_a: return "vd_a";
        case Kind::vd_b: return "vd_b";
        case Kind::pec: return "pec";
        case Kind::linear: return "linear";
    }
    return "?";
}

PointEvaluation evaluate_point(const Protocol& protocol, const Landscape& land, const std::vector<double>& theta,
                               const NoisySpec& noise) {
    const ParamCircuit c = theta.empty() ? land.circuit : land.circuit.with_theta(theta);
    const Observable& obs = land.obs;
    const bool empirical = protocol.variance == VarianceMode::empirical;
    Level base = measure(c, noise, land.rho_in, obs);

    PointEvaluation out;
    out.noisy = base.value;
    out.noisy_variance = empirical ? base.variance : 1.0;

    auto levels = [&](const std::vector<double>& factors) {
        std::vector<double> vals, vars;
        for (double a : factors) {
            Level l = a == 1.0 ? base : measure(c, noise.boosted(a), land.rho_in, obs);
            vals.push_back(l.value);
            vars.push_back(l.variance);
        }
        return std::make_pair(vals, empirical ? vars : std::vector<double>{});
    };

    switch (protocol.kind) {
        case Kind::identity:
            out.mitigated = {out.noisy, out.noisy_variance, 1.0, "identity", {}};
            break;
        case Kind::zne_richardson: {
            auto [vals, vars] = levels(protocol.factors);
            out.mitigated = mitigate::zne_richardson(vals, mitigate::ExtrapolationSpec::richardson(protocol.factors), vars);
            break;
        }
        case Kind::zne_exp: {
            if (protocol.factors.size() != 2) throw std::invalid_argument("zne_exp uses two levels");
            auto [vals, vars] = levels(protocol.factors);
            auto spec = mitigate::ExtrapolationSpec::exponential(protocol.factors[1], protocol.exp_base, protocol.exp_boost);
            out.mitigated = mitigate::zne_exponential(vals, spec, vars);
            break;
        }
        case Kind::zne_nibp: {
            if (protocol.factors.size() != 2) throw std::invalid_argument("zne_nibp uses two levels");
            auto [vals, vars] = levels(protocol.factors);
            int L = protocol.nibp_L >= 0 ? protocol.nibp_L : noise.instances(c.num_layers());
            auto spec = mitigate::ExtrapolationSpec::nibp(protocol.factors[1], noise.q(c.n()), L);
            double fp = obs.trace() / static_cast<double>(land.rho_in.dim());
            out.mitigated = mitigate::zne_nibp(vals, fp, spec, vars);
            break;
        }
        case Kind::vd_a:
        case Kind::vd_b: {
            auto proto = protocol.kind == Kind::vd_a ? mitigate::VdProtocol::A : mitigate::VdProtocol::B;
            out.mitigated = mitigate::vd_estimate(base.state, protocol.M, obs, proto, out.noisy_variance);
            if (empirical) {
                // binomial ancilla statistics of the copy-swap test
                auto pr = mitigate::vd_probabilities(base.state, protocol.M, obs);
                double tr = out.mitigated.params.at("tr_rho_m");
                double vn = 4.0 * pr.prob_1 * (1.0 - pr.prob_1);
                double vm;
                if (proto == mitigate::VdProtocol::B) {
                    double lm = std::pow(out.mitigated.params.at("lambda"), protocol.M);
                    vm = 4.0 * pr.prob_m * (1.0 - pr.prob_m) / (lm * lm);
                } else {
                    double cm = out.mitigated.value;
                    vm = 4.0 * (pr.prob_m * (1.0 - pr.prob_m) + cm * cm * pr.prob_m_norm * (1.0 - pr.prob_m_norm)) /
                         (tr * tr);
                }
                out.noisy_variance = vn;
                out.mitigated.variance = vm;
                out.mitigated.gamma = vn > 0.0 ? vm / vn : out.mitigated.gamma;
            }
            break;
        }
        case Kind::pec: {
            auto decomps = mitigate::pec_decompositions_for(c, noise);
            out.mitigated.protocol = "pec";
            out.mitigated.value = mitigate::pec_exact_expectation(c, noise, decomps, obs, land.rho_in);
            out.mitigated.gamma = mitigate::pec_gamma_total(decomps);
            out.mitigated.variance = out.mitigated.gamma * out.noisy_variance;
            break;
        }
        case Kind::linear:
            out.mitigated = protocol.ansatz.estimate(out.noisy, out.noisy_variance);
            break;
    }
    return out;
}

ResolvabilityReport chi_from_points(const PointEvaluation& p1, const PointEvaluation& p2, double precision,
                                    const std::string& protocol) {
    double var_n = 0.5 * (p1.noisy_variance + p2.noisy_variance);
    double var_m = 0.5 * (p1.mitigated.variance + p2.mitigated.variance);
    double g = 0.5 * (p1.mitigated.gamma + p2.mitigated.gamma);
    auto r = build_report(p2.noisy - p1.noisy, p2.mitigated.value - p1.mitigated.value, var_n, var_m, g, precision);
    r.definition = "chi";
    r.protocol = protocol.empty() ? p1.mitigated.protocol : protocol;
    return r;
}

ResolvabilityReport chi_two_points(const Landscape& land, const std::vector<double>& theta1,
                                   const std::vector<double>& theta2, const Protocol& protocol,
                                   const NoisySpec& noise, double precision) {
    auto a = evaluate_point(protocol, land, theta1, noise);
    auto b = evaluate_point(protocol, land, theta2, noise);
    auto r = chi_from_points(a, b, precision, protocol.name());
    r.noise_level = 1.0 - noise.q(land.circuit.n());
    return r;
}

ResolvabilityReport chi_average_from_points(const std::vector<PointEvaluation>& samples, double precision,
                                            const std::string& protocol) {
    if (samples.size() < 2) throw std::invalid_argument("averaged resolvability needs at least 2 samples");
    std::size_t star = 0;
    for (std::size_t i = 1; i < samples.size(); ++i)
        if (samples[i].noisy < samples[star].noisy) star = i;
    double dn = 0.0, dm = 0.0, var_n = 0.0, var_m = 0.0, g = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        var_n += samples[i].noisy_variance;
        var_m += samples[i].mitigated.variance;
        g += samples[i].mitigated.gamma;
        if (i == star) continue;
        dn += samples[i].noisy - samples[star].noisy;
        dm += samples[i].mitigated.value - samples[star].mitigated.value;
    }
    const double k = static_cast<double>(samples.size());
    const double m = k - 1.0;
    auto r = build_report(dn / m, dm / m, var_n / k, var_m / k, g / k, precision);
    r.definition = "chi_avg";
    r.protocol = protocol.empty() ? samples[0].mitigated.protocol : protocol;
    r.metadata["theta_star_index"] = std::to_string(star);
    r.metadata["theta_star_rule"] = "best sampled point at base noise";
    return r;
}

ResolvabilityReport chi_average(const Landscape& land, const std::vector<std::vector<double>>& samples,
                                const Protocol& protocol, const NoisySpec& noise, double precision) {
    std::vector<PointEvaluation> ev;
    ev.reserve(samples.size());
    for (const auto& th : samples) ev.push_back(evaluate_point(protocol, land, th, noise));
    auto r = chi_average_from_points(ev, precision, protocol.name());
    r.noise_level = 1.0 - noise.q(land.circuit.n());
    return r;
}

MitigationMap vd_map(int M) {
    if (M < 1) throw std::invalid_argument("M must be >= 1");
    return [M](const Matrix& rho) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(rho);
        Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0).array().pow(M).matrix();
        double tr = lam.sum();
        if (tr < 1e-14) throw std::domain_error("Tr[rho^M] collapsed");
        const Matrix& V = es.eigenvectors();
        return Matrix(V * (lam / tr).cast<densim::cplx>().asDiagonal() * V.adjoint());
    };
}

ResolvabilityReport chi_2design(const densim::Spectrum& spectrum, const Observable& obs, const MitigationMap& map,
                                double gamma, std::size_t n_haar_samples, Rng& rng) {
    const int n = spectrum.n();
    if (obs.n() != n) throw std::invalid_argument("observable size does not match spectrum");
    if (n_haar_samples < 2) throw std::invalid_argument("need at least 2 Haar samples");
    if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
    const Eigen::Index d = Eigen::Index{1} << n;
    Matrix rho = Matrix::Zero(d, d);
    for (Eigen::Index i = 0; i < d; ++i) rho(i, i) = spectrum.lambdas[static_cast<std::size_t>(i)];
    const double center = obs.trace() / static_cast<double>(d);

    double sn = 0, sm = 0, snn = 0, smm = 0, snm = 0;
    for (std::size_t s = 0; s < n_haar_samples; ++s) {
        Matrix U = densim::haar_random_unitary(n, rng);
        Matrix sigma = U * rho * U.adjoint();
        double cn = densim::expectation(sigma, obs.matrix()) - center;
        double cm = densim::expectation(map(sigma), obs.matrix()) - center;
        double xn = cn * cn, xm = cm * cm;
        sn += xn; sm += xm; snn += xn * xn; smm += xm * xm; snm += xn * xm;
    }
    const double N = static_cast<double>(n_haar_samples);
    double mn = sn / N, mm = sm / N;
    if (mn <= 1e-20 * std::max(1.0, obs.trace_sq())) throw std::domain_error("degenerate denominator: noisy cost does not vary");
    double vn = (snn / N - mn * mn) * N / (N - 1);
    double vm = (smm / N - mm * mm) * N / (N - 1);
    double cov = (snm / N - mn * mm) * N / (N - 1);
    double ratio = mm / mn;
    // delta method for a ratio of sample means
    double var_ratio = (vm / (mn * mn) - 2 * mm * cov / (mn * mn * mn) + mm * mm * vn / (mn * mn * mn * mn)) / N;

    ResolvabilityReport r;
    r.definition = "chi_2design";
    r.gamma = gamma;
    r.chi = ratio / gamma;
    r.chi_stderr = std::sqrt(std::max(0.0, var_ratio)) / gamma;
    r.delta_noisy = std::sqrt(mn);
    r.delta_mitigated = std::sqrt(mm);
    r.metadata["reference_state"] = "diag(lambda)";
    r.metadata["n_haar_samples"] = std::to_string(n_haar_samples);
    r.metadata["ratio"] = std::to_string(ratio);
    return r;
}

HaarMoments haar_moments_closed_form(const Matrix& rho, const Matrix& sigma, const Observable& obs) {
    if (rho.rows() != sigma.rows() || rho.rows() != obs.matrix().rows()) throw std::invalid_argument("dimension mismatch");
    const double d = static_cast<double>(rho.rows());
    const double t1 = obs.trace(), t2 = obs.trace_sq();
    const double rs = rho.cwiseProduct(sigma.transpose()).sum().real();
    const double ps = sigma.cwiseProduct(sigma.transpose()).sum().real();
    const double tr_sigma = sigma.trace().real();
    HaarMoments h;
    h.mean = t1 * tr_sigma / d;
    h.second_moment = (t2 * (d * rs - 1.0) - t1 * t1 * (rs - d)) / (d * (d * d - 1.0));
    h.variance = (t2 - t1 * t1 / d) * (ps - 1.0 / d) / (d * d - 1.0);
    return h;
}

double vd_eigenvalue_variance_ratio(const std::vector<double>& lambdas, int M) {
    if (M < 1) throw std::invalid_argument("M must be >= 1");
    const double d = static_cast<double>(lambdas.size());
    double m1 = 0, mM = 0;
    for (double l : lambdas) {
        m1 += l;
        mM += std::pow(l, M);
    }
    m1 /= d;
    mM /= d;
    double v1 = 0, vM = 0;
    for (double l : lambdas) {
        v1 += (l - m1) * (l - m1);
        vM += (std::pow(l, M) - mM) * (std::pow(l, M) - mM);
    }
    if (v1 <= 0.0) throw std::domain_error("uniform spectrum: eigenvalue variance is zero");
    return vM / v1;
}

}  // namespace qem::resolve
