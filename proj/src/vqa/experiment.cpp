#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <tuple>

#include "qem/vqa.hpp"

namespace qem::vqa {

CostMode parse_mode(const std::string& s) {
    if (s == "exact") return CostMode::exact;
    if (s == "noisy") return CostMode::noisy;
    if (s == "cdr") return CostMode::cdr;
    if (s == "vd") return CostMode::vd;
    throw std::invalid_argument("unknown cost mode '" + s + "' (expected exact, noisy, cdr or vd)");
}

std::string mode_name(CostMode m) {
    switch (m) {
        case CostMode::exact: return "exact";
        case CostMode::noisy: return "noisy";
        case CostMode::cdr: return "cdr";
        case CostMode::vd: return "vd";
    }
    return "?";
}

namespace {

std::vector<double> correlations_from_vector(const Graph& g, const densim::Vector& psi) {
    std::vector<double> zz;
    zz.reserve(g.edges.size());
    for (auto [i, j] : g.edges) {
        double v = 0.0;
        for (Eigen::Index b = 0; b < psi.size(); ++b) {
            const double pb = std::norm(psi[b]);
            v += (((b >> i) ^ (b >> j)) & 1) ? -pb : pb;
        }
        zz.push_back(v);
    }
    return zz;
}

std::string zz_string(int n, int i, int j) {
    std::string s(static_cast<std::size_t>(n), 'I');
    s[static_cast<std::size_t>(i)] = 'Z';
    s[static_cast<std::size_t>(j)] = 'Z';
    return s;
}

double l1(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d += std::abs(a[i] - b[i]);
    return d;
}

// +/-1 outcome estimator with success probability (1+x)/2.
double sampled_sign_mean(double x, std::uint64_t shots, Rng& rng) {
    std::binomial_distribution<std::uint64_t> b(shots, std::clamp((1.0 + x) / 2.0, 0.0, 1.0));
    return 2.0 * static_cast<double>(b(rng.engine())) / static_cast<double>(shots) - 1.0;
}

densim::Vector plus_vector(int n) {
    densim::Vector v = densim::Vector::Constant(Eigen::Index{1} << n, densim::cplx(1.0, 0.0));
    return v / std::sqrt(static_cast<double>(v.size()));
}

}  // namespace

CostModel::CostModel(const ExperimentConfig& cfg, const MaxCutInstance& inst, int rounds, std::shared_ptr<Rng> rng)
    : cfg_(cfg),
      inst_(inst),
      circuit_(build_qaoa_circuit(inst, {rounds, {}, cfg.swap_network})),
      noise_(densim::NoisySpec::uniform_local(inst.graph.n, cfg.noise_p)),
      plus_(QuantumState::plus(inst.graph.n)),
      rng_(std::move(rng)) {
    noise_.leading_layer = false;
}

std::vector<double> CostModel::noisy_correlations(const ParamCircuit& bound) {
    auto state = densim::run_noisy_circuit(bound, noise_, plus_);
    if (!cfg_.sample_shots) return edge_correlations(inst_.graph, state);
    return edge_correlations(inst_.graph, sample_counts(state, cfg_.shots_per_eval, *rng_));
}

std::vector<mitigate::LinearAnsatz> CostModel::train(const ParamCircuit& bound, std::uint64_t& shots) {
    int cap = cfg_.cdr_max_nonclifford;
    const int nc = mitigate::count_nonclifford(bound);
    if (nc < 2 * cap) cap = std::min(cap, nc / 2);
    auto training = mitigate::cdr_generate_training(bound, cap, cfg_.cdr_training, *rng_);
    const std::size_t ne = inst_.graph.edges.size();
    std::vector<std::vector<std::pair<double, double>>> pairs(ne);
    const auto plus = plus_vector(inst_.graph.n);
    for (const auto& t : training) {
        auto exact = correlations_from_vector(inst_.graph, simulate_statevector(t, plus));
        auto noisy = noisy_correlations(t);
        shots += cfg_.shots_per_eval;
        for (std::size_t e = 0; e < ne; ++e) pairs[e].emplace_back(exact[e], noisy[e]);
    }
    std::vector<mitigate::LinearAnsatz> fits(ne);
    for (std::size_t e = 0; e < ne; ++e) {
        try {
            fits[e] = mitigate::cdr_fit(pairs[e]);
        } catch (const std::exception&) {
            // no spread in the training data: leave the term unmitigated
            fits[e] = mitigate::LinearAnsatz{};
            fits[e].training = pairs[e];
            ++degenerate_;
        }
    }
    ++trainings_;
    return fits;
}

Evaluation CostModel::operator()(const std::vector<double>& x) {
    ParamCircuit bound = circuit_.with_theta(x);
    const std::uint64_t ns = cfg_.shots_per_eval;
    switch (cfg_.mode) {
        case CostMode::exact: return {exact_energy(inst_, bound), ns};
        case CostMode::noisy: return {maxcut_cost(noisy_correlations(bound)), ns};
        case CostMode::cdr: {
            std::uint64_t shots = 0;
            std::size_t fit = std::numeric_limits<std::size_t>::max();
            if (nm_) {
                double best = std::numeric_limits<double>::infinity();
                for (const auto& v : nm_->vertices()) {
                    auto it = fit_of_.find(v);
                    if (it == fit_of_.end()) continue;
                    double d = l1(v, x);
                    if (d < best) {
                        best = d;
                        fit = it->second;
                    }
                }
                if (best > cfg_.cdr_refresh_distance) fit = std::numeric_limits<std::size_t>::max();
            }
            if (fit == std::numeric_limits<std::size_t>::max()) {
                fits_.push_back(train(bound.bound(), shots));
                fit = fits_.size() - 1;
            }
            fit_of_[x] = fit;
            last_fit_ = fits_[fit];
            auto zz = noisy_correlations(bound);
            shots += ns;
            for (std::size_t e = 0; e < zz.size(); ++e) zz[e] = fits_[fit][e].apply(zz[e]);
            return {maxcut_cost(zz), shots};
        }
        case CostMode::vd: {
            auto state = densim::run_noisy_circuit(bound, noise_, plus_);
            const int n = inst_.graph.n;
            const std::uint64_t s = cfg_.vd_shots_per_term;
            double den = 0.0;
            std::vector<double> zz;
            for (auto [i, j] : inst_.graph.edges) {
                auto pt = densim::power_trace(state, cfg_.vd_copies, Observable::pauli(zz_string(n, i, j)));
                den = pt.tr_rho_m;
                zz.push_back(cfg_.sample_shots ? sampled_sign_mean(pt.tr_rho_m_o, s, *rng_) : pt.tr_rho_m_o);
            }
            if (cfg_.sample_shots) den = sampled_sign_mean(den, s, *rng_);
            for (auto& z : zz) z = den > 0.0 ? std::clamp(z / den, -1.0, 1.0) : 0.0;
            return {maxcut_cost(zz), (zz.size() + 1) * s};
        }
    }
    throw std::logic_error("unreachable cost mode");
}

namespace {

struct CellResult {
    std::vector<CheckpointRow> rows;
    CellStats stats;
};

CellResult run_cell(const ExperimentConfig& cfg, const Graph& graph, int graph_id, int p, const ProgressFn& progress,
                    std::mutex& log_mu) {
    const MaxCutInstance inst = maxcut_hamiltonian(graph);
    const std::uint64_t cell_seed = derive_seed(derive_seed(cfg.seed, 0x6365'6c6cULL + static_cast<std::uint64_t>(graph_id)),
                                                static_cast<std::uint64_t>(p));
    const Rng init_rng(cell_seed);
    auto sample_rng = std::make_shared<Rng>(derive_seed(cell_seed, 0x5348'4f54ULL + static_cast<std::uint64_t>(cfg.mode)));

    std::vector<std::unique_ptr<CostModel>> models;
    std::vector<std::unique_ptr<NelderMead>> nms;
    std::vector<double> first_x0;
    for (int i = 0; i < cfg.n_init; ++i) {
        Rng r = init_rng.split(static_cast<std::uint64_t>(i));
        std::vector<double> x0(static_cast<std::size_t>(2 * p));
        for (int j = 0; j < p; ++j) {
            x0[static_cast<std::size_t>(2 * j)] = r.uniform(0.0, 2.0 * std::numbers::pi);
            x0[static_cast<std::size_t>(2 * j + 1)] = r.uniform(0.0, std::numbers::pi);
        }
        if (i == 0) first_x0 = x0;
        models.push_back(std::make_unique<CostModel>(cfg, inst, p, sample_rng));
        CostModel* m = models.back().get();
        nms.push_back(std::make_unique<NelderMead>([m](const std::vector<double>& x) { return (*m)(x); },
                                                   initial_simplex(x0), cfg.nm));
        m->attach(nms.back().get());
    }
    const ParamCircuit& circuit = models.front()->circuit();

    double best_f = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> best_x = first_x0;
    std::uint64_t n_tot = 0, evals = 0;
    std::size_t next_cp = 0;

    CellResult out;
    auto record = [&](std::uint64_t cp) {
        const double ratio = exact_energy(inst, circuit.with_theta(best_x)) / inst.ground_energy;
        out.rows.push_back({graph_id, mode_name(cfg.mode), p, cp, ratio, best_f, cell_seed});
        if (progress) {
            std::ostringstream os;
            os << mode_name(cfg.mode) << " graph=" << graph_id << " p=" << p << " N_tot<=" << cp << " ratio=" << ratio;
            std::lock_guard<std::mutex> lk(log_mu);
            progress(os.str());
        }
    };

    bool active = true;
    while (active && next_cp < cfg.checkpoints.size()) {
        active = false;
        for (auto& nm : nms) {
            if (next_cp >= cfg.checkpoints.size()) break;
            if (nm->converged()) continue;
            active = true;
            const std::uint64_t before_shots = nm->shots(), before_evals = nm->evaluations();
            nm->step();
            n_tot += nm->shots() - before_shots;
            evals += nm->evaluations() - before_evals;
            // checkpoints crossed by this step report the state before it
            while (next_cp < cfg.checkpoints.size() && n_tot > cfg.checkpoints[next_cp]) record(cfg.checkpoints[next_cp++]);
            if (!(nm->best_f() >= best_f)) {
                best_f = nm->best_f();
                best_x = nm->best_x();
            }
        }
    }
    while (next_cp < cfg.checkpoints.size()) record(cfg.checkpoints[next_cp++]);

    std::uint64_t trainings = 0, degenerate = 0;
    for (const auto& m : models) {
        trainings += m->trainings();
        degenerate += m->degenerate_fits();
    }
    out.stats = {graph_id, p, n_tot, evals, trainings, degenerate, graph.redraws};
    return out;
}

}  // namespace

std::vector<SummaryRow> summarize(const std::vector<CheckpointRow>& rows) {
    std::map<std::tuple<std::string, int, std::uint64_t>, std::vector<double>> groups;
    for (const auto& r : rows) groups[{r.mode, r.p, r.n_tot_checkpoint}].push_back(r.approx_ratio);
    std::vector<SummaryRow> out;
    for (const auto& [key, v] : groups) {
        double mean = 0.0;
        for (double x : v) mean += x;
        mean /= static_cast<double>(v.size());
        double se = 0.0;
        if (v.size() > 1) {
            double ss = 0.0;
            for (double x : v) ss += (x - mean) * (x - mean);
            se = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
        }
        out.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), mean, se});
    }
    return out;
}

ExperimentReport run_optimization_experiment(const ExperimentConfig& cfg, const ProgressFn& progress) {
    if (cfg.n < 2) throw std::invalid_argument("experiment: n must be >= 2");
    if (cfg.graphs < 1 || cfg.rounds.empty() || cfg.n_init < 1 || cfg.checkpoints.empty() || cfg.shots_per_eval < 1)
        throw std::invalid_argument("experiment: empty graph, round, instance, checkpoint or shot setting");
    if (!std::is_sorted(cfg.checkpoints.begin(), cfg.checkpoints.end()))
        throw std::invalid_argument("experiment: checkpoints must be ascending");
    for (int p : cfg.rounds)
        if (p < 1 || p > 8) throw std::invalid_argument("experiment: rounds must lie in 1..8");
    densim::NoisySpec::uniform_local(cfg.n, cfg.noise_p).validate(cfg.n);
    if (cfg.n > densim::max_qubits()) densim::set_max_qubits(cfg.n);

    std::vector<Graph> graphs;
    for (int g = 0; g < cfg.graphs; ++g)
        graphs.push_back(erdos_renyi(cfg.n, cfg.edge_prob, derive_seed(cfg.seed, 0x6772'6170ULL + static_cast<std::uint64_t>(g))));

    struct Task {
        int g, p;
    };
    std::vector<Task> tasks;
    for (int g = 0; g < cfg.graphs; ++g)
        for (int p : cfg.rounds) tasks.push_back({g, p});
    std::vector<CellResult> results(tasks.size());
    std::vector<std::exception_ptr> errors(tasks.size());
    std::mutex log_mu;
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k; (k = next.fetch_add(1)) < tasks.size();) {
            try {
                results[k] = run_cell(cfg, graphs[static_cast<std::size_t>(tasks[k].g)], tasks[k].g, tasks[k].p, progress, log_mu);
            } catch (...) {
                errors[k] = std::current_exception();
            }
        }
    };
    const int jobs = std::max(1, std::min<int>(cfg.jobs, static_cast<int>(tasks.size())));
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);

    ExperimentReport rep;
    for (auto& r : results) {
        rep.rows.insert(rep.rows.end(), r.rows.begin(), r.rows.end());
        rep.cells.push_back(r.stats);
    }
    rep.summary = summarize(rep.rows);
    return rep;
}

}  // namespace qem::vqa
