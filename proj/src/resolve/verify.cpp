#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "qem/resolve.hpp"

namespace qem::resolve {

namespace {
using densim::cplx;
using densim::NoisySpec;
using Kind = Protocol::Kind;

int iparam(const BoundSpec& s, const std::string& k) { return static_cast<int>(std::lround(s.at(k))); }

std::string with_extra(const BoundSpec& s, const std::map<std::string, double>& extra) {
    BoundSpec t = s;
    for (const auto& [k, v] : extra) t.params[k] = v;
    return t.describe();
}

std::vector<double> random_angles(std::size_t k, Rng& rng) {
    std::vector<double> th(k);
    for (auto& x : th) x = rng.uniform(0.0, 2 * std::numbers::pi);
    return th;
}

// Random circuit landscape with |0...0> input and a random Pauli-sum observable.
Landscape random_landscape(int n, int layers, Rng& rng) {
    auto c = densim::random_circuit(n, layers, rng);
    return {c, QuantumState::basis(n, 0), random_observable(n, 3, rng)};
}

// Two random parameter points whose noise-free costs differ noticeably.
std::pair<std::vector<double>, std::vector<double>> distinct_points(const Landscape& land, Rng& rng) {
    const auto k = static_cast<std::size_t>(land.circuit.num_params());
    for (int attempt = 0; attempt < 100; ++attempt) {
        auto a = random_angles(k, rng), b = random_angles(k, rng);
        double ca = densim::expectation(densim::run_circuit(land.circuit.with_theta(a), land.rho_in), land.obs);
        double cb = densim::expectation(densim::run_circuit(land.circuit.with_theta(b), land.rho_in), land.obs);
        if (std::abs(ca - cb) > 1e-3) return {a, b};
    }
    throw std::runtime_error("could not find distinguishable landscape points");
}

PointEvaluation synthetic_point(double noisy, double mitigated, double gamma) {
    PointEvaluation p;
    p.noisy = noisy;
    p.noisy_variance = 1.0;
    p.mitigated.value = mitigated;
    p.mitigated.gamma = gamma;
    p.mitigated.variance = gamma;
    return p;
}

VerificationRow row(const BoundSpec& s, const std::string& params, double formula, double sim, bool bad) {
    return {s.name, params, formula, sim, bad};
}

bool differs(double a, double b) { return !(std::abs(a - b) <= kBoundSlack); }

// ---- recipes: each returns one row per trial ----

VerificationRow trial_gamma_vd(const BoundSpec& s, Rng& rng) {
    const int n = iparam(s, "n"), M = iparam(s, "M");
    const double p = s.at("p");
    Landscape land = random_landscape(n, 1, rng);
    NoisySpec noise = NoisySpec::global(p);
    noise.leading_layer = false;  // exactly one noise instance
    auto [a, b] = distinct_points(land, rng);
    Protocol pb = Protocol::parse("vd_b"), pa = Protocol::parse("vd_a");
    pb.M = pa.M = M;
    double chi_b = chi_two_points(land, a, b, pb, noise).chi;
    double chi_a = chi_two_points(land, a, b, pa, noise).chi;
    double f = gamma_vd(n, M, p);
    return row(s, with_extra(s, {{"chi_A", chi_a}}), f, chi_b, differs(chi_b, f) || chi_a > chi_b + kBoundSlack);
}

VerificationRow trial_g_vd(const BoundSpec& s, Rng& rng) {
    const int n = iparam(s, "n"), M = iparam(s, "M");
    const double d = std::ldexp(1.0, n);
    for (;;) {
        auto lam = random_spectrum(n, rng);
        double P = 0.0;
        for (double l : lam) P += l * l;
        if (P - 1.0 / d < 1e-9) continue;
        double ratio = vd_eigenvalue_variance_ratio(lam, M);
        double f = g_vd(n, M, P);
        return row(s, with_extra(s, {{"P", P}}), f, ratio, ratio > f + 1e-10);
    }
}

VerificationRow trial_pec_global(const BoundSpec& s, Rng& rng) {
    const int n = iparam(s, "n");
    const double p = s.at("p");
    Landscape land = random_landscape(n, 1, rng);
    NoisySpec noise = NoisySpec::global(p);
    noise.leading_layer = false;
    auto [a, b] = distinct_points(land, rng);
    double chi = chi_two_points(land, a, b, Protocol::parse("pec"), noise).chi;
    double f = chi_pec_global(n, p);
    return row(s, s.describe(), f, chi, differs(chi, f));
}

VerificationRow trial_q_pec(const BoundSpec& s, Rng& rng) {
    const int n = iparam(s, "n"), L = iparam(s, "L");
    const double p = s.at("p"), A = s.get("A", 1.0), q = s.get("q", 1.0 - p);
    std::vector<mitigate::PECDecomposition> decomps;
    for (int i = 0; i < n * L; ++i) decomps.push_back(mitigate::pec_decompose_depolarizing(1, p));
    const double gamma = mitigate::pec_gamma_total(decomps);
    const double F = rng.uniform(-0.5, 0.5);
    std::vector<PointEvaluation> pts;
    for (int i = 0; i < 12; ++i) {
        double c = rng.uniform(-1.0, 1.0);
        pts.push_back(synthetic_point(F + A * std::pow(q, L) * c, c, gamma));
    }
    double chi = chi_average_from_points(pts).chi;
    BoundSpec full = s;
    full.params["q"] = q;
    full.params["A"] = A;
    double f = eval_bound(full);
    return row(s, full.describe(), f, chi, std::abs(chi - f) > 1e-8 * std::max(1.0, f));
}

VerificationRow trial_zne_depol(const BoundSpec& s, Rng& rng) {
    const int model = iparam(s, "model"), L = iparam(s, "L");
    const double a1 = s.at("a1"), p = s.at("p");
    const int n = static_cast<int>(s.get("n", 2));
    Landscape land = random_landscape(n, L, rng);
    NoisySpec noise = NoisySpec::global(p);
    noise.leading_layer = false;  // L noise instances
    Protocol proto;
    proto.factors = {1.0, a1};
    mitigate::ExtrapolationSpec spec;
    if (model == 0) {
        proto.kind = Kind::zne_richardson;
        spec = mitigate::ExtrapolationSpec::richardson(proto.factors);
    } else if (model == 1) {
        proto.kind = Kind::zne_exp;
        proto.exp_base = {rng.uniform(0.5, 2.0), rng.uniform(0.5, 2.0)};
        proto.exp_boost = {rng.uniform(0.5, 2.0), rng.uniform(0.5, 2.0)};
        spec = mitigate::ExtrapolationSpec::exponential(a1, proto.exp_base, proto.exp_boost);
    } else {
        proto.kind = Kind::zne_nibp;
        proto.nibp_L = L;
        spec = mitigate::ExtrapolationSpec::nibp(a1, 1.0 - p, L);
    }
    const double c = mitigate::two_level_form(spec).c();
    auto [a, b] = distinct_points(land, rng);
    double chi = chi_two_points(land, a, b, proto, noise).chi;
    double f = chi_zne_depol(c, a1, p, L);
    return row(s, with_extra(s, {{"c", c}}), f, chi, chi > f + kBoundSlack);
}

VerificationRow trial_zne_avg(const BoundSpec& s, Rng& rng) {
    const int L = iparam(s, "L");
    const double a1 = s.at("a1"), p = s.at("p");
    const int n = static_cast<int>(s.get("n", 2));
    Landscape land = random_landscape(n, L, rng);
    NoisySpec noise = NoisySpec::uniform_local(n, p);
    Protocol proto = Protocol::parse("zne_richardson");
    proto.factors = {1.0, a1};
    std::vector<PointEvaluation> pts;
    std::vector<double> boosted;
    const auto k = static_cast<std::size_t>(land.circuit.num_params());
    for (int i = 0; i < 16; ++i) {
        auto th = random_angles(k, rng);
        pts.push_back(evaluate_point(proto, land, th, noise));
        boosted.push_back(densim::expectation(
            densim::run_noisy_circuit(land.circuit.with_theta(th), noise.boosted(a1), land.rho_in), land.obs));
    }
    auto rep = chi_average_from_points(pts);
    std::size_t star = std::stoul(rep.metadata.at("theta_star_index"));
    double db = 0.0;
    for (std::size_t i = 0; i < boosted.size(); ++i)
        if (i != star) db += boosted[i] - boosted[star];
    db /= static_cast<double>(boosted.size() - 1);
    const double z = db / rep.delta_noisy;
    double f = chi_zne_avg(z, a1);
    return row(s, with_extra(s, {{"z", z}}), f, rep.chi, rep.chi > f + kBoundSlack);
}

VerificationRow trial_zne_3level(const BoundSpec& s, Rng& rng) {
    const int L = iparam(s, "L");
    const double a1 = s.at("a1"), a2 = s.at("a2"), p = s.at("p");
    const int n = static_cast<int>(s.get("n", 2));
    Landscape land = random_landscape(n, L, rng);
    NoisySpec noise = NoisySpec::global(p);
    noise.leading_layer = false;
    Protocol proto = Protocol::parse("zne_richardson");
    proto.factors = {1.0, a1, a2};
    auto [a, b] = distinct_points(land, rng);
    double chi = chi_two_points(land, a, b, proto, noise).chi;
    double f = chi_zne_3level(a1, a2, p, L);
    return row(s, s.describe(), f, chi, differs(chi, f) || chi > 1.0 + kBoundSlack);
}

Matrix random_hermitian(Eigen::Index d, Rng& rng) {
    Matrix g(d, d);
    for (Eigen::Index j = 0; j < d; ++j)
        for (Eigen::Index i = 0; i < d; ++i) g(i, j) = cplx(rng.normal(), rng.normal());
    return (g + g.adjoint()) / 2.0;
}

Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

VerificationRow trial_thm1(const BoundSpec& s, Rng& rng) {
    const int n = iparam(s, "n"), M = iparam(s, "M"), k = iparam(s, "k"), L = iparam(s, "L");
    const double pmax = s.get("pmax", 0.3);
    auto c = densim::random_circuit(n, L, rng);
    std::vector<double> probs(static_cast<std::size_t>(n));
    for (auto& p : probs) p = rng.uniform(0.0, pmax);
    NoisySpec noise = NoisySpec::local(probs);
    auto sigma = densim::run_noisy_circuit(c, noise, QuantumState::basis(n, 0));
    const Eigen::Index d = Eigen::Index{1} << n;
    Matrix mixed = Matrix::Identity(d, d) / static_cast<double>(d);
    Matrix anc = Matrix::Zero(Eigen::Index{1} << k, Eigen::Index{1} << k);
    anc(0, 0) = 1.0;
    Matrix a = anc, b = anc;
    for (int m = 0; m < M; ++m) {
        a = kron(sigma.rho(), a);
        b = kron(mixed, b);
    }
    Matrix X = random_hermitian(a.rows(), rng);
    Eigen::SelfAdjointEigenSolver<Matrix> es(X, Eigen::EigenvaluesOnly);
    double norm = es.eigenvalues().cwiseAbs().maxCoeff();
    double E = densim::expectation(a, X), fp = densim::expectation(b, X);
    double q = noise.q(n);
    double f = g_thm1(norm, M, n, q, L);
    double dev = std::abs(E - fp);
    return row(s, with_extra(s, {{"q", q}}), f, dev, dev > f + kBoundSlack);
}

VerificationRow trial_avg_iii(const BoundSpec& s, Rng& rng) {
    const int n = iparam(s, "n");
    const double a = s.at("a"), p = s.at("p");
    const double d = std::ldexp(1.0, n);
    auto c = densim::random_circuit(n, 2, rng);
    NoisySpec noise = NoisySpec::uniform_local(n, p);
    auto in = QuantumState::basis(n, 0);
    auto r1 = densim::run_noisy_circuit(c, noise, in);
    auto ra = densim::run_noisy_circuit(c, noise.boosted(a), in);
    auto form = mitigate::two_level_form(mitigate::ExtrapolationSpec::richardson({1.0, a}));
    Matrix mapped = (form.A * r1.rho() - form.B * ra.rho()) / form.D;
    double pm = mapped.squaredNorm();
    double P1 = densim::purity(r1), Pa = densim::purity(ra);
    // Haar second moments about Tr[O]/2^n: the (Tr O^2 - Tr[O]^2/d)/(d^2-1) factor cancels.
    double chi = (pm - 1.0 / d) / (P1 - 1.0 / d) / form.gamma();
    double f = chi_avg_iii(form.c(), Pa, P1, n);
    return row(s, with_extra(s, {{"P_1", P1}, {"P_a", Pa}}), f, chi, chi > f + kBoundSlack);
}

VerificationRow trial_pec_local(const BoundSpec& s, Rng& rng) {
    const double b = s.at("b"), p = s.at("p");
    const double gamma = mitigate::pec_decompose_depolarizing(1, p).gamma;
    const double F = rng.uniform(-0.5, 0.5);
    std::vector<PointEvaluation> pts;
    for (int i = 0; i < 12; ++i) {
        double c = rng.uniform(-1.0, 1.0);
        pts.push_back(synthetic_point(F + (1.0 - b * p) * c, c, gamma));
    }
    double chi = chi_average_from_points(pts).chi;
    double f = chi_pec_local(b, p);
    bool bad = differs(chi, f);
    if (b <= 0.75 && chi > 1.0 + kBoundSlack) bad = true;
    if (b > 1.0 && p > 0.0 && p <= 1.0 / b && !(chi > pec_local_threshold(p))) bad = true;
    return row(s, with_extra(s, {{"threshold", pec_local_threshold(p)}}), f, chi, bad);
}

using Recipe = VerificationRow (*)(const BoundSpec&, Rng&);

Recipe recipe_for(const std::string& name) {
    if (name == "Gamma_VD") return trial_gamma_vd;
    if (name == "G_VD") return trial_g_vd;
    if (name == "chi_PEC_global") return trial_pec_global;
    if (name == "Q_PEC") return trial_q_pec;
    if (name == "chi_ZNE_depol") return trial_zne_depol;
    if (name == "chi_ZNE_avg") return trial_zne_avg;
    if (name == "chi_ZNE_3level") return trial_zne_3level;
    if (name == "G_thm1") return trial_thm1;
    if (name == "chi_avg_III") return trial_avg_iii;
    if (name == "chi_PEC_local") return trial_pec_local;
    throw std::invalid_argument("unknown bound '" + name + "'");
}

std::vector<double> grid(double lo, double hi, int steps) {
    std::vector<double> v;
    for (int i = 0; i < steps; ++i) v.push_back(steps == 1 ? lo : lo + (hi - lo) * i / (steps - 1));
    return v;
}
}  // namespace

std::vector<double> random_spectrum(int n, Rng& rng) {
    const auto d = static_cast<std::size_t>(1) << n;
    std::vector<double> w(d);
    switch (rng.integer(0, 2)) {
        case 0:  // uniform on the simplex
            for (auto& x : w) x = -std::log(1.0 - rng.uniform());
            break;
        case 1: {  // sharpened: exponent spreads purity toward 1
            double s = rng.uniform(0.5, 10.0);
            for (auto& x : w) x = std::pow(-std::log(1.0 - rng.uniform()), s);
            break;
        }
        default: {  // pure state mixed with white noise
            double t = rng.uniform();
            for (auto& x : w) x = t / static_cast<double>(d);
            w[static_cast<std::size_t>(rng.integer(0, static_cast<std::int64_t>(d) - 1))] += 1.0 - t;
        }
    }
    double sum = 0.0;
    for (double x : w) sum += x;
    for (auto& x : w) x /= sum;
    std::sort(w.begin(), w.end(), std::greater<>());
    return w;
}

Observable random_observable(int n, int terms, Rng& rng) {
    const char letters[4] = {'I', 'X', 'Y', 'Z'};
    std::vector<densim::PauliTerm> t;
    for (int k = 0; k < terms; ++k) {
        std::string s(static_cast<std::size_t>(n), 'I');
        while (s.find_first_not_of('I') == std::string::npos)
            for (auto& ch : s) ch = letters[rng.integer(0, 3)];
        t.push_back({rng.normal(), s});
    }
    return Observable(n, std::move(t));
}

ViolationReport verify_bound(const BoundSpec& spec, std::size_t n_trials, Rng& rng) {
    Recipe r = recipe_for(spec.name);
    ViolationReport rep;
    rep.bound_name = spec.name;
    for (std::size_t t = 0; t < n_trials; ++t) {
        Rng trial = rng.split(t);
        rep.rows.push_back(r(spec, trial));
        ++rep.n_trials;
        if (rep.rows.back().violation) ++rep.n_violations;
    }
    return rep;
}

std::size_t default_trials(const std::string& name) {
    if (name == "G_VD") return 10000;
    if (name == "G_thm1") return 40;
    if (name == "chi_PEC_local" || name == "chi_ZNE_avg") return 1;
    if (name == "chi_avg_III") return 5;
    return 2;
}

std::vector<BoundSpec> default_grid(const std::string& name) {
    (void)recipe_for(name);
    std::vector<BoundSpec> out;
    auto ps = grid(0.1, 0.9, 9);
    if (name == "Gamma_VD") {
        for (int n = 1; n <= 3; ++n)
            for (int M = 2; M <= 4; ++M)
                for (double p : ps) out.push_back({name, {{"n", n}, {"M", M}, {"p", p}}});
    } else if (name == "G_VD") {
        for (int n = 1; n <= 3; ++n)
            for (int M = 2; M <= 4; ++M) out.push_back({name, {{"n", n}, {"M", M}}});
    } else if (name == "chi_PEC_global") {
        for (int n = 1; n <= 3; ++n)
            for (double p : ps) out.push_back({name, {{"n", n}, {"p", p}}});
    } else if (name == "Q_PEC") {
        for (int n = 1; n <= 2; ++n)
            for (int L = 1; L <= 4; ++L)
                for (double p : {0.05, 0.1, 0.2, 0.3})
                    for (double A : {0.5, 1.0}) out.push_back({name, {{"n", n}, {"L", L}, {"p", p}, {"A", A}}});
    } else if (name == "chi_ZNE_depol") {
        for (int model = 0; model < 3; ++model)
            for (double a1 : {1.5, 2.0, 3.0})
                for (int L = 1; L <= 4; ++L)
                    for (double p : {0.02, 0.05, 0.1, 0.2, 0.3})
                        out.push_back({name, {{"model", model}, {"a1", a1}, {"L", L}, {"p", p}}});
    } else if (name == "chi_ZNE_avg") {
        for (double a1 : {1.5, 2.0, 3.0})
            for (int L = 1; L <= 3; ++L)
                for (double p : {0.02, 0.05, 0.1}) out.push_back({name, {{"a1", a1}, {"L", L}, {"p", p}}});
    } else if (name == "chi_ZNE_3level") {
        for (auto [a1, a2] : {std::pair{1.5, 2.0}, std::pair{1.5, 3.0}, std::pair{2.0, 3.0}})
            for (int L = 1; L <= 4; ++L)
                for (double p : {0.02, 0.05, 0.1, 0.2, 0.3})
                    out.push_back({name, {{"a1", a1}, {"a2", a2}, {"L", L}, {"p", p}}});
    } else if (name == "G_thm1") {
        for (int n = 1; n <= 4; ++n)
            for (int M = 1; M <= 3; ++M)
                for (int k = 0; k <= 2; ++k)
                    if (n * M + k <= 8)
                        for (int L : {1, 3}) out.push_back({name, {{"n", n}, {"M", M}, {"k", k}, {"L", L}}});
    } else if (name == "chi_avg_III") {
        for (int n = 1; n <= 3; ++n)
            for (double a : {1.5, 2.0, 3.0})
                for (double p : {0.05, 0.1, 0.2, 0.3}) out.push_back({name, {{"n", n}, {"a", a}, {"p", p}}});
    } else if (name == "chi_PEC_local") {
        for (double b : {0.5, 0.75, 0.9, 1.5, 2.0})
            for (double p : ps)
                if (b * p < 1.0) out.push_back({name, {{"b", b}, {"p", p}}});
    }
    return out;
}

}  // namespace qem::resolve
