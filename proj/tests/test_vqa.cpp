#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "qem/vqa.hpp"

using namespace qem;
using namespace qem::vqa;

namespace {

Graph make_graph(int n, std::vector<std::pair<int, int>> e) { return Graph{n, std::move(e), 0}; }

int brute_max_cut(const Graph& g) {
    int best = 0;
    for (int b = 0; b < (1 << g.n); ++b) {
        int cut = 0;
        for (auto [i, j] : g.edges) cut += ((b >> i) & 1) != ((b >> j) & 1);
        best = std::max(best, cut);
    }
    return best;
}

// exp(i t H) for Hermitian H
densim::Matrix expi(const densim::Matrix& H, double t) {
    Eigen::SelfAdjointEigenSolver<densim::Matrix> es(H);
    Eigen::VectorXcd ph = (es.eigenvalues() * t).unaryExpr([](double x) { return std::polar(1.0, x); });
    return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

double quadratic_debits = 0;

}  // namespace

TEST_CASE("random graphs") {
    auto k5 = erdos_renyi(5, 1.0, 1);
    CHECK(k5.edges.size() == 10);
    CHECK_THROWS_AS(erdos_renyi(5, 0.0, 1, 20), std::runtime_error);
    auto a = erdos_renyi(6, 0.5, 42), b = erdos_renyi(6, 0.5, 42);
    CHECK(a.edges == b.edges);
    CHECK_THROWS(erdos_renyi(1, 0.5, 1));
    CHECK_THROWS(erdos_renyi(4, 1.5, 1));
    // sparse graphs trigger logged re-draws
    int redraws = 0;
    for (std::uint64_t s = 0; s < 50; ++s) redraws += erdos_renyi(2, 0.2, s).redraws;
    CHECK(redraws > 0);
}

TEST_CASE("MaxCut Hamiltonian") {
    CHECK(maxcut_hamiltonian(make_graph(2, {{0, 1}})).ground_energy == -1.0);
    CHECK(maxcut_hamiltonian(make_graph(3, {{0, 1}, {1, 2}, {0, 2}})).ground_energy == -2.0);
    CHECK(maxcut_hamiltonian(make_graph(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {0, 4}})).ground_energy == -4.0);
    CHECK_THROWS(maxcut_hamiltonian(make_graph(3, {})));

    for (std::uint64_t s = 0; s < 5; ++s) {
        auto g = erdos_renyi(5, 0.5, s);
        auto inst = maxcut_hamiltonian(g);
        CHECK(inst.ground_energy == -brute_max_cut(g));
        CHECK(inst.hamiltonian.is_diagonal());
        const auto& H = inst.hamiltonian.matrix();
        for (Eigen::Index i = 0; i < H.rows(); ++i)
            CHECK(H(i, i).real() == doctest::Approx(inst.diagonal[static_cast<std::size_t>(i)]).epsilon(1e-14));
    }
}

TEST_CASE("QAOA circuit") {
    auto g = erdos_renyi(5, 0.5, 3);
    auto inst = maxcut_hamiltonian(g);
    auto zero = build_qaoa_circuit(inst, {2, {0, 0, 0, 0}, true});
    CHECK(exact_energy(inst, zero) == doctest::Approx(-static_cast<double>(g.edges.size()) / 2).epsilon(1e-12));
    CHECK(zero.num_params() == 4);
    CHECK_THROWS(build_qaoa_circuit(inst, {0, {}, true}));
    CHECK_THROWS(build_qaoa_circuit(inst, {2, {0.1, 0.2}, true}));

    // matches exp(i beta H_M) exp(i gamma H) |+>^n built from dense exponentials
    Rng rng(4);
    densim::Matrix HM = densim::Matrix::Zero(32, 32);
    for (int q = 0; q < 5; ++q) {
        std::string s(5, 'I');
        s[static_cast<std::size_t>(q)] = 'X';
        HM += densim::pauli_matrix(s);
    }
    for (int t = 0; t < 5; ++t) {
        std::vector<double> x{rng.uniform(0, 6.3), rng.uniform(0, 3.2), rng.uniform(0, 6.3), rng.uniform(0, 3.2)};
        densim::Vector psi = densim::Vector::Constant(32, 1.0 / std::sqrt(32.0));
        for (int j = 0; j < 2; ++j) {
            psi = expi(inst.hamiltonian.matrix(), x[static_cast<std::size_t>(2 * j)]) * psi;
            psi = expi(HM, x[static_cast<std::size_t>(2 * j + 1)]) * psi;
        }
        const double oracle = (psi.adjoint() * inst.hamiltonian.matrix() * psi)(0, 0).real();
        for (bool swaps : {true, false}) {
            auto c = build_qaoa_circuit(inst, {2, x, swaps});
            CHECK(exact_energy(inst, c) == doctest::Approx(oracle).epsilon(1e-10));
            auto rho = densim::run_circuit(c, QuantumState::plus(5));
            CHECK(densim::expectation(rho, inst.hamiltonian) == doctest::Approx(oracle).epsilon(1e-10));
        }
    }
}

TEST_CASE("single-edge QAOA landscape on a fine grid") {
    auto inst = maxcut_hamiltonian(make_graph(2, {{0, 1}}));
    densim::Matrix HM = densim::pauli_matrix("XI") + densim::pauli_matrix("IX");
    for (int i = 0; i <= 12; ++i)
        for (int j = 0; j <= 12; ++j) {
            const double gamma = 2 * std::numbers::pi * i / 12, beta = std::numbers::pi * j / 12;
            densim::Vector psi = densim::Vector::Constant(4, 0.5);
            psi = expi(HM, beta) * expi(inst.hamiltonian.matrix(), gamma) * psi;
            const double oracle = (psi.adjoint() * inst.hamiltonian.matrix() * psi)(0, 0).real();
            auto c = build_qaoa_circuit(inst, {1, {gamma, beta}, false});
            CHECK(exact_energy(inst, c) == doctest::Approx(oracle).epsilon(1e-12));
        }
}

TEST_CASE("linear connectivity: every two-qubit gate acts on neighbours") {
    auto inst = maxcut_hamiltonian(erdos_renyi(5, 1.0, 0));
    auto c = build_qaoa_circuit(inst, {2, {}, true});
    for (const auto& layer : c.layers())
        for (const auto& g : layer)
            if (densim::arity(g.kind) == 2) CHECK(std::abs(g.q0 - g.q1) == 1);
}

TEST_CASE("shot sampling") {
    Rng rng(7);
    auto s = densim::run_noisy_circuit(densim::random_circuit(3, 2, rng), densim::NoisySpec::uniform_local(3, 0.1),
                                       QuantumState::basis(3, 0));
    Observable o(3, {{1.0, "ZZI"}, {-0.5, "IZI"}, {0.3, "XIY"}, {0.2, "III"}});
    const double exact = densim::expectation(s, o);
    const std::uint64_t N = 1000000;
    // per-term variances bound the estimator variance
    double var = 0.0;
    for (const auto& t : o.terms()) {
        double v = densim::expectation(s, Observable::pauli(t.pauli));
        var += 2.0 * t.coeff * t.coeff * (1 - v * v);
    }
    CHECK(std::abs(sample_expectation(s, o, N, rng) - exact) < 5 * std::sqrt(var / N));

    auto eig = QuantumState::basis(3, 5);
    Observable zz(3, {{1.0, "ZZI"}, {2.0, "IIZ"}});
    CHECK(sample_expectation(eig, zz, 3, rng) == doctest::Approx(densim::expectation(eig, zz)).epsilon(1e-15));

    auto counts = sample_counts(s, 4096, rng);
    std::uint64_t tot = 0;
    for (auto c : counts) tot += c;
    CHECK(tot == 4096);
    CHECK_THROWS(sample_expectation(s, o, 0, rng));
}

TEST_CASE("variance of the sample mean scales as 1/N") {
    Rng rng(8);
    auto s = QuantumState::pure(densim::haar_random_state(2, rng));
    Observable o(2, {{1.0, "ZZ"}, {0.7, "ZI"}});
    std::vector<double> lx, ly;
    for (std::uint64_t N : {16, 64, 256, 1024, 4096}) {
        const int R = 2000;
        double m = 0, m2 = 0;
        for (int r = 0; r < R; ++r) {
            double v = sample_expectation(s, o, N, rng);
            m += v;
            m2 += v * v;
        }
        m /= R;
        lx.push_back(std::log(static_cast<double>(N)));
        ly.push_back(std::log(m2 / R - m * m));
    }
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= lx.size();
    my /= ly.size();
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxy += (lx[i] - mx) * (ly[i] - my);
        sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    CHECK(std::abs(sxy / sxx + 1.0) < 0.1);
}

TEST_CASE("Nelder-Mead on a quadratic") {
    quadratic_debits = 0;
    CostFn f = [](const std::vector<double>& x) {
        quadratic_debits += 3;
        return Evaluation{(x[0] - 1) * (x[0] - 1), 3};
    };
    NelderMeadOptions opt;
    opt.tol_f = 1e-6;
    opt.tol_x = 1e-6;
    auto r = nelder_mead(f, initial_simplex({4.0}), std::numeric_limits<std::uint64_t>::max(), opt);
    CHECK(std::abs(r.best_x[0] - 1.0) < 1e-4);
    CHECK(r.shots == static_cast<std::uint64_t>(quadratic_debits));
    CHECK(r.shots == 3 * r.evaluations);
    for (std::size_t i = 1; i < r.trajectory.size(); ++i) {
        CHECK(r.trajectory[i].n_tot >= r.trajectory[i - 1].n_tot);
        CHECK(r.trajectory[i].best_cost <= r.trajectory[i - 1].best_cost);
    }

    auto tiny = nelder_mead(f, {{2.0}, {2.5}}, 2, opt);
    CHECK(tiny.best_x == std::vector<double>{2.0});
    CHECK(tiny.shots == 0);
    CHECK(std::isnan(tiny.best_f));
}

TEST_CASE("Nelder-Mead on Rosenbrock") {
    CostFn f = [](const std::vector<double>& x) {
        const double a = 1 - x[0], b = x[1] - x[0] * x[0];
        return Evaluation{a * a + 100 * b * b, 1};
    };
    NelderMeadOptions opt;
    opt.tol_f = 0;
    opt.tol_x = 0;
    opt.max_iterations = 10000;
    auto r = nelder_mead(f, initial_simplex({-1.0, 1.0}), std::numeric_limits<std::uint64_t>::max(), opt);
    CHECK(r.best_f < 1e-6);
}

TEST_CASE("Nelder-Mead rejects degenerate simplices") {
    CostFn f = [](const std::vector<double>& x) { return Evaluation{x[0], 1}; };
    CHECK_THROWS_AS(NelderMead(f, {{0, 0}, {1, 1}, {2, 2}}), std::invalid_argument);
    CHECK_THROWS_AS(NelderMead(f, {{0, 0}, {1, 1}}), std::invalid_argument);
}

TEST_CASE("default noise removes 30-50% of the cost contrast") {
    ExperimentConfig cfg;
    Rng rng(9);
    double slope = 0.0;
    const int graphs = 5;
    for (int g = 0; g < graphs; ++g) {
        auto inst = maxcut_hamiltonian(erdos_renyi(5, 0.5, 500 + static_cast<std::uint64_t>(g)));
        auto c = build_qaoa_circuit(inst, {2, {}, true});
        auto noise = densim::NoisySpec::uniform_local(5, cfg.noise_p);
        noise.leading_layer = false;
        std::vector<double> ex, no;
        for (int k = 0; k < 60; ++k) {
            std::vector<double> x{rng.uniform(0, 6.3), rng.uniform(0, 3.2), rng.uniform(0, 6.3), rng.uniform(0, 3.2)};
            auto b = c.with_theta(x);
            ex.push_back(exact_energy(inst, b));
            no.push_back(maxcut_cost(edge_correlations(inst.graph, densim::run_noisy_circuit(b, noise, QuantumState::plus(5)))));
        }
        double me = 0, mn = 0;
        for (std::size_t k = 0; k < ex.size(); ++k) {
            me += ex[k];
            mn += no[k];
        }
        me /= ex.size();
        mn /= no.size();
        double sxy = 0, sxx = 0;
        for (std::size_t k = 0; k < ex.size(); ++k) {
            sxy += (ex[k] - me) * (no[k] - mn);
            sxx += (ex[k] - me) * (ex[k] - me);
        }
        slope += sxy / sxx / graphs;
    }
    MESSAGE("retained contrast " << slope);
    CHECK(slope >= 0.5);
    CHECK(slope <= 0.7);
}

TEST_CASE("noise-free, infinite-shot cost modes coincide") {
    ExperimentConfig cfg;
    cfg.noise_p = 0.0;
    cfg.sample_shots = false;
    cfg.cdr_training = 20;
    auto inst = maxcut_hamiltonian(erdos_renyi(4, 0.6, 11));
    auto rng = std::make_shared<Rng>(1);
    Rng ang(2);
    for (int t = 0; t < 3; ++t) {
        std::vector<double> x{ang.uniform(0, 6.3), ang.uniform(0, 3.2), ang.uniform(0, 6.3), ang.uniform(0, 3.2)};
        std::vector<double> vals;
        for (auto m : {CostMode::exact, CostMode::noisy, CostMode::cdr, CostMode::vd}) {
            cfg.mode = m;
            CostModel model(cfg, inst, 2, rng);
            vals.push_back(model(x).value);
            if (m == CostMode::cdr) {
                for (const auto& fit : model.last_fit()) {
                    CHECK(std::abs(fit.a1 - 1.0) < 1e-8);
                    CHECK(std::abs(fit.a2) < 1e-8);
                }
            }
        }
        for (double v : vals) CHECK(v == doctest::Approx(vals[0]).epsilon(1e-10));
    }
}

TEST_CASE("CDR reuses the ansatz of a nearby simplex vertex") {
    ExperimentConfig cfg;
    cfg.mode = CostMode::cdr;
    cfg.cdr_training = 10;
    auto inst = maxcut_hamiltonian(erdos_renyi(4, 0.6, 12));
    CostModel model(cfg, inst, 1, std::make_shared<Rng>(3));
    NelderMead nm([&](const std::vector<double>& x) { return model(x); }, {{1.0, 0.5}, {1.1, 0.5}, {1.0, 0.505}});
    model.attach(&nm);
    nm.step();  // the third vertex lies within 0.01 of the first and reuses its fit
    CHECK(model.trainings() == 2);
    auto e = model({1.0, 0.5 + 0.004});
    CHECK(model.trainings() == 2);
    CHECK(e.shots == cfg.shots_per_eval);
    auto far = model({2.0, 0.5});
    CHECK(model.trainings() == 3);
    CHECK(far.shots == (cfg.cdr_training + 1) * cfg.shots_per_eval);
}

TEST_CASE("VD shot accounting") {
    ExperimentConfig cfg;
    cfg.mode = CostMode::vd;
    auto inst = maxcut_hamiltonian(erdos_renyi(4, 0.6, 13));
    CostModel model(cfg, inst, 1, std::make_shared<Rng>(4));
    CHECK(model({0.3, 0.2}).shots == (inst.graph.edges.size() + 1) * 65536);
}

TEST_CASE("near-Clifford training circuits for QAOA") {
    auto inst = maxcut_hamiltonian(erdos_renyi(6, 1.0, 0));
    Rng rng(5);
    std::vector<double> x{0.4, 0.9, 1.3, 0.2};
    auto c = build_qaoa_circuit(inst, {2, x, true}).bound();
    REQUIRE(mitigate::count_nonclifford(c) > 30);
    auto train = mitigate::cdr_generate_training(c, 30, 100, rng);
    CHECK(train.size() == 100);
    for (const auto& t : train) CHECK(mitigate::count_nonclifford(t) <= 30);
}

TEST_CASE("noise-free optimization solves a small instance") {
    ExperimentConfig cfg;
    cfg.mode = CostMode::exact;
    cfg.n = 3;
    cfg.rounds = {3};
    cfg.graphs = 2;
    cfg.n_init = 4;
    cfg.checkpoints = {200000};
    auto rep = run_optimization_experiment(cfg);
    REQUIRE(rep.rows.size() == 2);
    for (const auto& r : rep.rows) {
        CHECK(r.approx_ratio > 0.99);
        CHECK(r.approx_ratio <= 1.0 + 1e-12);
    }
}

TEST_CASE("experiments are deterministic and conserve shots") {
    ExperimentConfig cfg;
    cfg.mode = CostMode::noisy;
    cfg.n = 3;
    cfg.rounds = {1};
    cfg.graphs = 2;
    cfg.n_init = 3;
    cfg.checkpoints = {5000, 20000};
    auto a = run_optimization_experiment(cfg);
    cfg.jobs = 2;
    auto b = run_optimization_experiment(cfg);
    REQUIRE(a.rows.size() == 4);
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        CHECK(a.rows[i].approx_ratio == b.rows[i].approx_ratio);
        CHECK(a.rows[i].best_cost_mitigated == b.rows[i].best_cost_mitigated);
        CHECK(a.rows[i].seed == b.rows[i].seed);
    }
    for (const auto& c : a.cells) {
        CHECK(c.shots == c.evaluations * cfg.shots_per_eval);
        CHECK(c.shots > 20000);
    }
    CHECK(a.summary.size() == 2);
}

TEST_CASE("experiment config parsing") {
    auto c = parse_experiment_config(R"({"mode": "vd", "n": 4, "rounds": [1], "vd": {"copies": 3},
                                         "optimizer": {"n_init": 7, "checkpoints": [10, 20]}})");
    CHECK(c.mode == CostMode::vd);
    CHECK(c.n == 4);
    CHECK(c.vd_copies == 3);
    CHECK(c.n_init == 7);
    CHECK(c.checkpoints == std::vector<std::uint64_t>{10, 20});

    try {
        parse_experiment_config(R"({"mode": "bogus", "n": 1, "edge_prob": 2, "extra": 1,
                                    "optimizer": {"checkpoints": [5, 3]}})");
        FAIL("expected an error");
    } catch (const std::invalid_argument& e) {
        std::string msg = e.what();
        CHECK(msg.find("5 config error") != std::string::npos);
        for (const char* key : {"mode", "n:", "edge_prob", "extra", "optimizer.checkpoints"})
            CHECK(msg.find(key) != std::string::npos);
    }
    CHECK_THROWS_AS(parse_experiment_config("{not json"), std::invalid_argument);
    CHECK_THROWS(parse_mode("quantum"));
}
