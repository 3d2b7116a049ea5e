#include <cmath>
#include <numbers>

#include "doctest.h"
#include "qem/mitigate.hpp"

using namespace qem;
using namespace qem::mitigate;
using densim::Gate;
using densim::GateKind;

namespace {

QuantumState diag_state(double a) {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 0) = a;
    m(1, 1) = 1.0 - a;
    return QuantumState::from_matrix(m);
}

// Superoperator of a map on n qubits, built column by column.
template <class F>
Matrix superop(int n, F f) {
    const Eigen::Index d = Eigen::Index{1} << n;
    Matrix S(d * d, d * d);
    for (Eigen::Index k = 0; k < d * d; ++k) {
        Matrix e = Matrix::Zero(d, d);
        e(k % d, k / d) = 1.0;
        f(e);
        for (Eigen::Index j = 0; j < d * d; ++j) S(j, k) = e(j % d, j / d);
    }
    return S;
}

}  // namespace

TEST_CASE("Richardson coefficients satisfy the moment conditions") {
    for (auto f : {std::vector<double>{1, 2}, {1, 1.5, 3}, {1, 2, 3, 5}}) {
        auto b = richardson_coefficients(f);
        double s0 = 0.0;
        for (double x : b) s0 += x;
        CHECK(s0 == doctest::Approx(1.0).epsilon(1e-12));
        for (std::size_t t = 1; t < f.size(); ++t) {
            double st = 0.0;
            for (std::size_t j = 0; j < f.size(); ++j) st += b[j] * std::pow(f[j], static_cast<double>(t));
            CHECK(std::abs(st) < 1e-10);
        }
    }
    CHECK_THROWS(richardson_coefficients({1.0}));
    CHECK_THROWS(richardson_coefficients({1.0, 1.0}));
}

TEST_CASE("Richardson examples") {
    auto two = ExtrapolationSpec::richardson({1, 2});
    CHECK(zne_richardson({0.9, 0.8}, two).value == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(zne_richardson({0.3, 0.3}, two).value == doctest::Approx(0.3).epsilon(1e-14));
    CHECK(zne_richardson({0.9, 0.8}, two).gamma == doctest::Approx(5.0));

    auto three = ExtrapolationSpec::richardson({1, 2, 3});
    auto poly = [](double e) { return 0.7 - 0.2 * e + 0.05 * e * e; };
    CHECK(std::abs(zne_richardson({poly(1), poly(2), poly(3)}, three).value - 0.7) < 1e-12);
    CHECK_THROWS(zne_richardson({0.9}, two));
}

TEST_CASE("Richardson is exact on polynomials of degree k-1") {
    Rng rng(5);
    for (int k = 2; k <= 5; ++k) {
        std::vector<double> f{1.0};
        for (int j = 1; j < k; ++j) f.push_back(f.back() + rng.uniform(0.3, 1.0));
        std::vector<double> coef(static_cast<std::size_t>(k));
        for (auto& c : coef) c = rng.uniform(-1, 1);
        std::vector<double> vals;
        for (double a : f) {
            double v = 0.0;
            for (int t = k - 1; t >= 0; --t) v = v * a + coef[static_cast<std::size_t>(t)];
            vals.push_back(v);
        }
        CHECK(std::abs(zne_richardson(vals, ExtrapolationSpec::richardson(f)).value - coef[0]) < 1e-10);
    }
}

TEST_CASE("exponential extrapolation examples") {
    auto s = ExtrapolationSpec::exponential(2.0, {1.0, 1.0}, {2.0, 1.0});
    CHECK(zne_exponential({0.5, 0.3}, s).value == doctest::Approx(0.4).epsilon(1e-14));

    auto unit = ExtrapolationSpec::exponential(2.0, {1.0, 0.3}, {1.0, 2.5});
    CHECK(zne_exponential({0.9, 0.8}, unit).value ==
          doctest::Approx(zne_richardson({0.9, 0.8}, ExtrapolationSpec::richardson({1, 2})).value));

    ExpLevel base{1.3, 0.7}, boost{0.8, 1.9};
    const double p0 = -0.42;
    auto m = ExtrapolationSpec::exponential(3.0, base, boost);
    double v = zne_exponential({p0 / base.weight(), p0 / boost.weight()}, m).value;
    CHECK(std::abs(v - p0) < 1e-12);
    auto f = two_level_form(m);
    CHECK(zne_exponential({0.1, 0.2}, m).gamma == doctest::Approx(f.gamma()).epsilon(1e-14));
    CHECK_THROWS(ExtrapolationSpec::exponential(2.0, {-1.0, 1.0}, {1.0, 1.0}));
}

TEST_CASE("NIBP extrapolation examples") {
    auto s = ExtrapolationSpec::nibp(2.0, 0.5, 1, 0.125);
    CHECK(zne_nibp({0.3, 0.3}, 0.3, s).value == doctest::Approx(0.125).epsilon(1e-14));
    CHECK(two_level_form(ExtrapolationSpec::nibp(2.0, 0.5, 1)).c() == doctest::Approx(0.25).epsilon(1e-14));
    CHECK_THROWS(ExtrapolationSpec::nibp(2.0, 0.0, 1));

    // C~(q) = F + q^L (B + p1 (1-q) + p2 (1-q)^2) with K = F - p1
    const double F = 0.1, B = 0.6, p1 = 0.3, a = 2.0;
    const int L = 3;
    for (double q : {0.99, 0.95, 0.9}) {
        auto model = [&](double x, double p2) { return F + std::pow(x, L) * (B + p1 * (1 - x) + p2 * (1 - x) * (1 - x)); };
        auto spec = ExtrapolationSpec::nibp(a, q, L, F - p1);
        double exact = zne_nibp({model(q, 0.0), model(q / a, 0.0)}, F, spec).value;
        CHECK(std::abs(exact - (B + F)) < 1e-12);
        double second = zne_nibp({model(q, 0.2), model(q / a, 0.2)}, F, spec).value;
        CHECK(std::abs(second - (B + F)) < 5.0 * (1 - q / a) * (1 - q / a));
    }
}

TEST_CASE("virtual distillation examples") {
    Rng rng(3);
    auto pure = QuantumState::pure(densim::haar_random_state(2, rng));
    Observable o(2, {{1.0, "ZX"}, {0.3, "IY"}});
    for (int M = 2; M <= 4; ++M) {
        CHECK(vd_estimate(pure, M, o, VdProtocol::A).value == doctest::Approx(densim::expectation(pure, o)).epsilon(1e-10));
        CHECK(vd_estimate(pure, M, o, VdProtocol::B).value == doctest::Approx(densim::expectation(pure, o)).epsilon(1e-10));
    }
    auto s = densim::apply_global_depolarizing(QuantumState::basis(1, 0), 0.5);
    auto a = vd_estimate(s, 2, Observable::pauli("Z"), VdProtocol::A);
    CHECK(a.value == doctest::Approx(0.8).epsilon(1e-14));
    CHECK(a.gamma == doctest::Approx(1.0 / (0.625 * 0.625)));
    auto b = vd_estimate(s, 2, Observable::pauli("Z"), VdProtocol::B);
    CHECK(b.value == doctest::Approx(0.5 / 0.5625).epsilon(1e-14));
    CHECK(b.gamma == doctest::Approx(1.0 / std::pow(0.75, 4)).epsilon(1e-14));
    CHECK_THROWS(vd_estimate(s, 1, Observable::pauli("Z"), VdProtocol::A));

    auto pr = vd_probabilities(s, 2, Observable::pauli("Z"));
    CHECK(pr.prob_1 == doctest::Approx(0.75));
    CHECK(pr.prob_m == doctest::Approx(0.75));
    CHECK(pr.prob_m_norm == doctest::Approx(0.8125));
}

TEST_CASE("VD denominator does not depend on the input state under global depolarizing") {
    Rng rng(21);
    for (int n = 1; n <= 3; ++n)
        for (int M = 2; M <= 4; ++M) {
            const double p = rng.uniform(0.05, 0.95);
            double first = -1.0;
            for (int t = 0; t < 5; ++t) {
                auto s = densim::apply_global_depolarizing(QuantumState::pure(densim::haar_random_state(n, rng)), p);
                double tr = densim::power_trace(s, M, Observable::pauli(std::string(static_cast<std::size_t>(n), 'Z'))).tr_rho_m;
                if (first < 0) first = tr;
                CHECK(std::abs(tr - first) < 1e-12);
            }
        }
}

TEST_CASE("PEC decomposition examples") {
    auto id = pec_decompose_depolarizing(1, 0.0);
    CHECK(id.gamma == doctest::Approx(1.0));
    CHECK(id.q_alpha[0] == doctest::Approx(1.0));
    CHECK(pec_decompose_depolarizing(1, 0.5).gamma == doctest::Approx(3.25).epsilon(1e-14));
    CHECK_THROWS(pec_decompose_depolarizing(1, 1.0));

    auto d2 = pec_decompose_depolarizing(2, 0.3);
    double ps = 0.0;
    for (double x : d2.p_alpha) ps += x;
    CHECK(ps == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(d2.q_alpha[0] == doctest::Approx(1 + 15 * 0.3 / (16 * 0.7)));
    CHECK(d2.q_alpha[5] == doctest::Approx(-0.3 / (16 * 0.7)));
    CHECK(d2.gamma == doctest::Approx((16 - 0.6 + 0.09) / (16 * 0.49)).epsilon(1e-14));
}

TEST_CASE("PEC decomposition inverts the depolarizing channel") {
    for (int n = 1; n <= 2; ++n)
        for (double p : {0.1, 0.5, 0.9}) {
            auto dec = pec_decompose_depolarizing(n, p);
            Matrix S = superop(n, [&](Matrix& m) {
                densim::ops::depolarize_global(m, p);
                dec.apply(m);
            });
            CHECK((S - Matrix::Identity(S.rows(), S.cols())).cwiseAbs().maxCoeff() < 1e-10);
        }
}

TEST_CASE("PEC estimator") {
    Rng rng(99);
    densim::ParamCircuit c(1, {{Gate::rot(GateKind::RY, 0, 0.9)}});
    auto in = QuantumState::basis(1, 0);
    Observable z = Observable::pauli("Z");
    const double exact = densim::expectation(densim::run_circuit(c, in), z);

    auto clean = pec_estimate(c, NoisySpec::global(0.0), pec_decompositions_for(c, NoisySpec::global(0.0)), z, in, 50, rng);
    CHECK(clean.estimate.value == doctest::Approx(exact).epsilon(1e-12));
    CHECK(clean.sample_variance < 1e-20);

    auto noise = NoisySpec::global(0.3);
    auto dec = pec_decompositions_for(c, noise);
    CHECK(pec_exact_expectation(c, noise, dec, z, in) == doctest::Approx(exact).epsilon(1e-12));
    auto r = pec_estimate(c, noise, dec, z, in, 200000, rng);
    CHECK(std::abs(r.estimate.value - exact) < 5.0 * r.std_error);

    std::vector<PECDecomposition> two{pec_decompose_depolarizing(1, 0.5), pec_decompose_depolarizing(1, 0.5)};
    CHECK(pec_gamma_total(two) == doctest::Approx(10.5625).epsilon(1e-14));
}

TEST_CASE("PEC unbiased on two qubits with local noise") {
    Rng rng(7);
    auto c = densim::random_circuit(2, 2, rng);
    auto noise = NoisySpec::uniform_local(2, 0.2);
    auto in = QuantumState::basis(2, 0);
    Observable o(2, {{1.0, "ZZ"}, {0.5, "XI"}});
    const double exact = densim::expectation(densim::run_circuit(c, in), o);
    auto r = pec_estimate(c, noise, pec_decompositions_for(c, noise), o, in, 100000, rng);
    CHECK(std::abs(r.estimate.value - exact) < 5.0 * r.std_error);
}

TEST_CASE("CDR fit examples") {
    std::vector<std::pair<double, double>> line;
    for (double x : {-0.5, 0.1, 0.3, 0.8}) line.emplace_back(2.0 * x + 0.1, x);
    auto f = cdr_fit(line);
    CHECK(std::abs(f.a1 - 2.0) < 1e-12);
    CHECK(std::abs(f.a2 - 0.1) < 1e-12);
    CHECK(f.residual < 1e-24);
    CHECK_THROWS(cdr_fit({{0.3, 0.2}, {0.3, 0.2}}));
    CHECK_THROWS(cdr_fit({{0.3, 0.2}}));
}

TEST_CASE("CDR fit recovers the global depolarizing slope") {
    Rng rng(13);
    const int n = 2, L = 3;
    const double p = 0.15;
    auto noise = NoisySpec::global(p);
    noise.leading_layer = false;
    Observable o(2, {{1.0, "ZZ"}, {0.4, "XI"}, {0.7, "II"}});
    auto tmpl = densim::random_circuit(n, L, rng);
    std::vector<std::pair<double, double>> pairs;
    for (int t = 0; t < 12; ++t) {
        std::vector<double> th(static_cast<std::size_t>(tmpl.num_params()));
        for (auto& x : th) x = rng.uniform(0, 2 * std::numbers::pi);
        auto c = tmpl.with_theta(th);
        auto in = QuantumState::basis(n, 0);
        pairs.emplace_back(densim::expectation(densim::run_circuit(c, in), o),
                           densim::expectation(densim::run_noisy_circuit(c, noise, in), o));
    }
    auto f = cdr_fit(pairs);
    const double qL = std::pow(1 - p, L);
    CHECK(std::abs(f.a1 - 1.0 / qL) < 1e-10);
    CHECK(std::abs(f.a2 + (1 - qL) / qL * o.trace() / 4.0) < 1e-10);
}

TEST_CASE("near-Clifford training circuits") {
    Rng rng(17);
    auto c = densim::random_circuit(3, 3, rng);
    const int total = count_nonclifford(c);
    REQUIRE(total > 0);
    auto same = cdr_generate_training(c, total, 3, rng);
    for (const auto& t : same)
        for (int l = 0; l < t.num_layers(); ++l)
            for (std::size_t g = 0; g < t.layers()[static_cast<std::size_t>(l)].size(); ++g)
                CHECK(t.layers()[static_cast<std::size_t>(l)][g].resolved_angle({}) ==
                      doctest::Approx(c.bound().layers()[static_cast<std::size_t>(l)][g].resolved_angle({})));

    for (const auto& t : cdr_generate_training(c, 0, 5, rng)) {
        CHECK(count_nonclifford(t) == 0);
        for (const auto& layer : t.layers())
            for (const auto& g : layer)
                if (densim::is_rotation(g.kind)) {
                    double k = g.angle / (std::numbers::pi / 2);
                    CHECK(std::abs(k - std::round(k)) < 1e-12);
                    CHECK(g.angle >= 0.0);
                    CHECK(g.angle < 2 * std::numbers::pi);
                }
    }
    CHECK_THROWS(cdr_generate_training(c, -1, 1, rng));
}
