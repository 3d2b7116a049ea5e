#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "qem/densim.hpp"
#include "qem/mitigate.hpp"
#include "qem/rng.hpp"

namespace qem::vqa {

using densim::Observable;
using densim::ParamCircuit;
using densim::QuantumState;

struct Graph {
    int n = 0;
    std::vector<std::pair<int, int>> edges;
    int redraws = 0;  // empty graphs rejected before this one
};

// Each pair included independently; empty graphs are re-drawn up to
// max_attempts times, then std::runtime_error.
Graph erdos_renyi(int n, double edge_prob, std::uint64_t seed, int max_attempts = 1000);

struct MaxCutInstance {
    Graph graph;
    Observable hamiltonian;
    std::vector<double> diagonal;  // H on each computational basis state
    double ground_energy;
};

MaxCutInstance maxcut_hamiltonian(const Graph& g);

struct QAOAConfig {
    int rounds = 1;
    std::vector<double> angles;  // gamma_1, beta_1, ..., gamma_p, beta_p
    bool swap_network = true;    // linear connectivity via SWAP chains
};

// prod_j exp(i beta_j H_M) exp(i gamma_j H) applied to |+>^n; gates are
// scheduled greedily into layers. Parameter slot 2j is gamma_{j+1}, 2j+1 is beta_{j+1}.
ParamCircuit build_qaoa_circuit(const MaxCutInstance& inst, const QAOAConfig& cfg);

// Noise-free expectation via state vector.
densim::Vector simulate_statevector(const ParamCircuit& c, const densim::Vector& psi_in);
double exact_energy(const MaxCutInstance& inst, const ParamCircuit& c);

// Shot counts per computational basis state.
std::vector<std::uint64_t> sample_counts(const QuantumState& s, std::uint64_t n_shots, Rng& rng);
// Z-only terms share one batch of n_shots samples; other terms are measured
// in their own rotated basis with n_shots each.
double sample_expectation(const QuantumState& s, const Observable& obs, std::uint64_t n_shots, Rng& rng);
// Per-edge <Z_i Z_j> estimates from counts.
std::vector<double> edge_correlations(const Graph& g, const std::vector<std::uint64_t>& counts);
std::vector<double> edge_correlations(const Graph& g, const QuantumState& s);
double maxcut_cost(const std::vector<double>& zz);

struct Evaluation {
    double value;
    std::uint64_t shots;
};
using CostFn = std::function<Evaluation(const std::vector<double>&)>;

struct NelderMeadOptions {
    double tol_f = 1e-4;
    double tol_x = 1e-4;
    std::uint64_t max_iterations = std::numeric_limits<std::uint64_t>::max();
};

// Standard coefficients (1, 2, 0.5, 0.5) with the ordering rules of
// Lagarias et al.; steppable so that several instances can share a budget.
class NelderMead {
public:
    NelderMead(CostFn f, std::vector<std::vector<double>> simplex, NelderMeadOptions opt = {});

    // Evaluates the initial simplex on the first call, then one iteration.
    void step();
    bool converged() const;
    bool initialized() const { return initialized_; }

    const std::vector<std::vector<double>>& vertices() const { return x_; }
    const std::vector<double>& best_x() const { return x_.front(); }
    double best_f() const { return f_.empty() ? std::numeric_limits<double>::quiet_NaN() : f_.front(); }
    std::uint64_t shots() const { return shots_; }
    std::uint64_t evaluations() const { return evals_; }
    std::uint64_t iterations() const { return iters_; }

private:
    double eval(const std::vector<double>& x);
    void sort();
    void replace_worst(std::vector<double> x, double f);

    CostFn f_fn_;
    std::vector<std::vector<double>> x_;
    std::vector<double> f_;
    NelderMeadOptions opt_;
    bool initialized_ = false;
    std::uint64_t shots_ = 0, evals_ = 0, iters_ = 0;
};

struct TrajectoryPoint {
    std::uint64_t n_tot;
    double best_cost;
    std::vector<double> best_angles;
};

struct OptimizationResult {
    std::vector<double> best_x;
    double best_f = std::numeric_limits<double>::quiet_NaN();
    std::uint64_t shots = 0;
    std::uint64_t evaluations = 0;
    std::vector<TrajectoryPoint> trajectory;
};

// Throws std::invalid_argument for a degenerate simplex.
OptimizationResult nelder_mead(const CostFn& f, std::vector<std::vector<double>> simplex, std::uint64_t budget,
                               NelderMeadOptions opt = {});

// MATLAB-style simplex around x0: +5% per coordinate (0.00025 for zeros).
std::vector<std::vector<double>> initial_simplex(const std::vector<double>& x0);

enum class CostMode { exact, noisy, cdr, vd };
CostMode parse_mode(const std::string& s);
std::string mode_name(CostMode m);

struct ExperimentConfig {
    CostMode mode = CostMode::noisy;
    int n = 5;
    std::vector<int> rounds{1, 2};
    int graphs = 10;
    double edge_prob = 0.5;
    std::uint64_t seed = 2021;
    bool swap_network = true;
    double noise_p = 0.007;  // uniform local depolarizing after every layer
    int n_init = 3000;
    std::uint64_t shots_per_eval = 1024;
    std::vector<std::uint64_t> checkpoints{1000000, 3000000, 10000000};
    NelderMeadOptions nm;
    int cdr_training = 100;
    int cdr_max_nonclifford = 30;
    double cdr_refresh_distance = 0.01;
    bool sample_shots = true;  // false: exact expectations, shots still debited
    int vd_copies = 2;
    std::uint64_t vd_shots_per_term = 65536;
    int jobs = 1;

    std::uint64_t budget() const { return checkpoints.empty() ? 0 : checkpoints.back(); }
};

// Cost function of one optimizer instance. CDR fits one linear ansatz per
// edge term and reuses the ansatz of the nearest simplex vertex when it is
// within cdr_refresh_distance (1-norm).
class CostModel {
public:
    CostModel(const ExperimentConfig& cfg, const MaxCutInstance& inst, int rounds, std::shared_ptr<Rng> rng);

    Evaluation operator()(const std::vector<double>& x);
    void attach(const NelderMead* nm) { nm_ = nm; }

    std::uint64_t trainings() const { return trainings_; }
    std::uint64_t degenerate_fits() const { return degenerate_; }
    const std::vector<mitigate::LinearAnsatz>& last_fit() const { return last_fit_; }
    const ParamCircuit& circuit() const { return circuit_; }

private:
    std::vector<double> noisy_correlations(const ParamCircuit& bound);
    std::vector<mitigate::LinearAnsatz> train(const ParamCircuit& bound, std::uint64_t& shots);

    const ExperimentConfig& cfg_;
    const MaxCutInstance& inst_;
    ParamCircuit circuit_;
    densim::NoisySpec noise_;
    QuantumState plus_;
    std::shared_ptr<Rng> rng_;
    const NelderMead* nm_ = nullptr;
    std::vector<std::vector<mitigate::LinearAnsatz>> fits_;
    std::map<std::vector<double>, std::size_t> fit_of_;
    std::vector<mitigate::LinearAnsatz> last_fit_;
    std::uint64_t trainings_ = 0, degenerate_ = 0;
};

struct CheckpointRow {
    int graph_id;
    std::string mode;
    int p;
    std::uint64_t n_tot_checkpoint;
    double approx_ratio;
    double best_cost_mitigated;
    std::uint64_t seed;
};

struct SummaryRow {
    std::string mode;
    int p;
    std::uint64_t n_tot_checkpoint;
    double mean_ratio;
    double stderr_ratio;
};

struct CellStats {
    int graph_id;
    int p;
    std::uint64_t shots;
    std::uint64_t evaluations;
    std::uint64_t trainings;
    std::uint64_t degenerate_fits;
    int redraws;
};

struct ExperimentReport {
    std::vector<CheckpointRow> rows;
    std::vector<SummaryRow> summary;
    std::vector<CellStats> cells;
};

using ProgressFn = std::function<void(const std::string&)>;

ExperimentReport run_optimization_experiment(const ExperimentConfig& cfg, const ProgressFn& progress = {});

// Parses a JSON experiment file; all problems are collected and thrown as
// one std::invalid_argument listing each of them.
ExperimentConfig parse_experiment_config(const std::string& json_text);
std::vector<SummaryRow> summarize(const std::vector<CheckpointRow>& rows);

}  // namespace qem::vqa
