#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "qem/densim.hpp"
#include "qem/rng.hpp"

namespace qem::mitigate {

using densim::Matrix;
using densim::NoisySpec;
using densim::Observable;
using densim::ParamCircuit;
using densim::QuantumState;

// value with Var[C_m] under the shot model and gamma = Var[C_m] / Var[C~].
// Without measured variances the per-shot variance of C~ is taken as 1, so
// variance == gamma.
struct MitigatedEstimate {
    double value = 0.0;
    double variance = 0.0;
    double gamma = 1.0;
    std::string protocol;
    std::map<std::string, double> params;
};

enum class Extrapolation { richardson, exponential, nibp };

// r^t weight of one level in the exponential model
struct ExpLevel {
    double r = 1.0;
    double t = 1.0;
    double weight() const;
};

struct ExtrapolationSpec {
    Extrapolation model = Extrapolation::richardson;
    std::vector<double> factors;  // a_0 = 1 < a_1 < ...
    std::vector<double> coeffs;   // Richardson beta_j
    ExpLevel exp_base, exp_boost;
    double q = 1.0;
    int L = 1;
    double K = 0.0;  // additive constant of the NIBP model

    static ExtrapolationSpec richardson(std::vector<double> factors);
    static ExtrapolationSpec exponential(double a1, ExpLevel base, ExpLevel boost);
    static ExtrapolationSpec nibp(double a, double q, int L, double K = 0.0);
};

// Lagrange weights extrapolating to a = 0.
std::vector<double> richardson_coefficients(const std::vector<double>& factors);

// values[j] is measured at factors[j]. level_variances (optional) are the
// per-shot variances at each level; gamma is then relative to level 0.
MitigatedEstimate zne_richardson(const std::vector<double>& values, const ExtrapolationSpec& spec,
                                 const std::vector<double>& level_variances = {});
MitigatedEstimate zne_exponential(const std::vector<double>& values, const ExtrapolationSpec& spec,
                                  const std::vector<double>& level_variances = {});
// values = {C~(q), C~(q/a)}
MitigatedEstimate zne_nibp(const std::vector<double>& values, double fixed_point, const ExtrapolationSpec& spec,
                           const std::vector<double>& level_variances = {});

// Coefficients of the common two-level form C_m = (A C~(1) - B C~(a)) / D + E.
struct TwoLevelForm {
    double A, B, D;
    double c() const { return A / B; }
    double gamma() const { return (A * A + B * B) / (D * D); }
};
TwoLevelForm two_level_form(const ExtrapolationSpec& spec);

enum class VdProtocol { A, B };

// For A the reported gamma is the lower bound 1 / Tr[rho^M]^2.
MitigatedEstimate vd_estimate(const QuantumState& s, int M, const Observable& obs, VdProtocol protocol,
                              double noisy_shot_variance = 1.0);

// Ancilla outcome probabilities of the copy-swap test:
// prob_1 = (1 + Tr[rho O]) / 2, prob_M = (1 + Tr[rho^M O]) / 2, prob_M' = (1 + Tr[rho^M]) / 2.
struct VdProbabilities {
    double prob_1, prob_m, prob_m_norm;
};
VdProbabilities vd_probabilities(const QuantumState& s, int M, const Observable& obs);

struct PECDecomposition {
    int n_target = 1;
    double p = 0.0;
    std::vector<std::string> basis;  // Pauli channel P . P; basis[0] is identity
    std::vector<double> q_alpha;
    std::vector<double> p_alpha;
    std::vector<int> signs;
    double G_N = 1.0;
    double gamma = 1.0;  // sum q_alpha^2

    // Applies sum_alpha q_alpha P_alpha m P_alpha on qubits [offset, offset + n_target).
    void apply(Matrix& m, int offset = 0) const;
};

PECDecomposition pec_decompose_depolarizing(int n_target_qubits, double p);

// One decomposition per noise location of run_noisy_circuit, in time order.
// For local noise locations are (instance, qubit) pairs in qubit-minor order;
// for global noise there is one n-qubit decomposition per instance.
std::vector<PECDecomposition> pec_decompositions_for(const ParamCircuit& c, const NoisySpec& noise);
double pec_gamma_total(const std::vector<PECDecomposition>& decomps);

// Exact value of the quasi-probability estimator: every inverse map applied
// deterministically instead of sampled.
double pec_exact_expectation(const ParamCircuit& c, const NoisySpec& noise,
                             const std::vector<PECDecomposition>& decomps, const Observable& obs,
                             const QuantumState& rho_in);

struct PECResult {
    MitigatedEstimate estimate;  // value = Monte Carlo mean; gamma = product of sum q^2
    double std_error = 0.0;
    double sample_variance = 0.0;
    double G_tot = 1.0;
    std::size_t n_samples = 0;
};

PECResult pec_estimate(const ParamCircuit& c, const NoisySpec& noise, const std::vector<PECDecomposition>& decomps,
                       const Observable& obs, const QuantumState& rho_in, std::size_t n_samples, Rng& rng);

struct LinearAnsatz {
    double a1 = 1.0;
    double a2 = 0.0;
    std::vector<std::pair<double, double>> training;  // (exact, noisy)
    double residual = 0.0;

    double apply(double noisy) const { return a1 * noisy + a2; }
    MitigatedEstimate estimate(double noisy, double noisy_shot_variance = 1.0) const;
};

LinearAnsatz cdr_fit(const std::vector<std::pair<double, double>>& training);

// Clifford test for rotation angles: multiple of pi/2 within tol.
bool is_clifford_angle(double a, double tol = 1e-9);
int count_nonclifford(const ParamCircuit& c);

// Near-Clifford copies of the (bound) circuit: random non-Clifford rotations
// are snapped to the nearest multiple of pi/2 until at most max_nonclifford
// remain. Returned circuits have no parameter slots.
std::vector<ParamCircuit> cdr_generate_training(const ParamCircuit& c, int max_nonclifford, int count, Rng& rng);

}  // namespace qem::mitigate
