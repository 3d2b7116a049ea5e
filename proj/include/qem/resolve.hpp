#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "qem/densim.hpp"
#include "qem/mitigate.hpp"
#include "qem/rng.hpp"

namespace qem::resolve {

using densim::Matrix;
using densim::NoisySpec;
using densim::Observable;
using densim::ParamCircuit;
using densim::QuantumState;
using mitigate::MitigatedEstimate;

// Smallest N with sqrt(2 var / N) <= precision * |delta|. Throws
// std::domain_error when delta == 0 (no finite N resolves the points).
std::uint64_t shots_to_resolve(double delta, double variance_per_shot, double precision_fraction);

struct ResolvabilityReport {
    std::string definition;  // "chi", "chi_avg", "chi_2design"
    std::string protocol;
    double chi = 0.0;
    double delta_noisy = 0.0;
    double delta_mitigated = 0.0;
    double gamma = 1.0;
    std::uint64_t n_noisy = 0;
    std::uint64_t n_em = 0;
    double shot_ratio = 0.0;  // n_noisy / n_em
    double noise_level = 0.0;
    double chi_stderr = 0.0;  // Monte Carlo error, 2-design only
    std::map<std::string, std::string> metadata;
};

// Noisy and mitigated value of one parameter point with per-shot variances.
struct PointEvaluation {
    double noisy = 0.0;
    double noisy_variance = 1.0;
    MitigatedEstimate mitigated;
};

enum class VarianceMode { equality, empirical };

struct Protocol {
    enum class Kind { identity, zne_richardson, zne_exp, zne_nibp, vd_a, vd_b, pec, linear };
    Kind kind = Kind::identity;
    std::vector<double> factors{1.0, 2.0};  // ZNE levels
    mitigate::ExpLevel exp_base, exp_boost;
    int nibp_L = -1;  // -1: number of noise instances
    int M = 2;
    mitigate::LinearAnsatz ansatz;
    VarianceMode variance = VarianceMode::equality;

    static Protocol parse(const std::string& name);
    std::string name() const;
};

struct Landscape {
    ParamCircuit circuit;
    QuantumState rho_in;
    Observable obs;
};

PointEvaluation evaluate_point(const Protocol& protocol, const Landscape& land, const std::vector<double>& theta,
                               const NoisySpec& noise);

// Two-point resolvability from evaluated points.
ResolvabilityReport chi_from_points(const PointEvaluation& p1, const PointEvaluation& p2, double precision,
                                    const std::string& protocol = "");
ResolvabilityReport chi_two_points(const Landscape& land, const std::vector<double>& theta1,
                                   const std::vector<double>& theta2, const Protocol& protocol,
                                   const NoisySpec& noise, double precision = 0.1);

// Averaged resolvability; theta_* is the sample with the lowest noisy cost.
ResolvabilityReport chi_average_from_points(const std::vector<PointEvaluation>& samples, double precision = 0.1,
                                            const std::string& protocol = "");
ResolvabilityReport chi_average(const Landscape& land, const std::vector<std::vector<double>>& samples,
                                const Protocol& protocol, const NoisySpec& noise, double precision = 0.1);

using MitigationMap = std::function<Matrix(const Matrix&)>;
MitigationMap vd_map(int M);

// Unitary-2-design average by Monte Carlo over Haar unitaries with reference state diag(lambda).
ResolvabilityReport chi_2design(const densim::Spectrum& spectrum, const Observable& obs, const MitigationMap& map,
                                double gamma, std::size_t n_haar_samples, Rng& rng);

struct HaarMoments {
    double mean;
    double second_moment;  // <C_rho C_sigma>
    double variance;       // Var[C_sigma]
};
HaarMoments haar_moments_closed_form(const Matrix& rho, const Matrix& sigma, const Observable& obs);

// Var[lambda^M] / Var[lambda] over the uniform distribution on the spectrum.
double vd_eigenvalue_variance_ratio(const std::vector<double>& lambdas, int M);

struct BoundSpec {
    std::string name;
    std::map<std::string, double> params;

    double at(const std::string& key) const;
    double get(const std::string& key, double fallback) const;
    std::string describe() const;
};

const std::vector<std::string>& bound_names();
double eval_bound(const BoundSpec& spec);

// Named closed forms, also reachable through eval_bound.
double gamma_vd(int n, int M, double p);
double g_vd(int n, int M, double P);
double chi_pec_global(int n, double p);
double q_pec(double p);
double chi_zne_depol(double c, double a1, double p, int L);
double chi_zne_avg(double z, double c);
double chi_zne_3level(double a1, double a2, double p, int L);
double chi_zne_3level_avg(double a1, double a2, double z1, double z2);
double g_thm1(double norm_x, int M, int n, double q, int L);
double chi_avg_iii(double c, double P_a, double P_1, int n);
double chi_pec_local(double b, double p);
double pec_local_threshold(double p);

struct VerificationRow {
    std::string bound_name;
    std::string params;
    double formula_value;
    double simulated_value;
    bool violation;
};

struct ViolationReport {
    std::string bound_name;
    std::vector<VerificationRow> rows;
    std::size_t n_trials = 0;
    std::size_t n_violations = 0;
    double fraction() const { return n_trials ? static_cast<double>(n_violations) / static_cast<double>(n_trials) : 0.0; }
};

constexpr double kBoundSlack = 1e-9;

ViolationReport verify_bound(const BoundSpec& spec, std::size_t n_trials, Rng& rng);
// Grid of BoundSpecs covering each recipe's default region.
std::vector<BoundSpec> default_grid(const std::string& name);
std::size_t default_trials(const std::string& name);

// Random spectrum with purity spread over (1/2^n, 1].
std::vector<double> random_spectrum(int n, Rng& rng);
// Random Hermitian observable as a sum of Pauli strings with normal weights.
Observable random_observable(int n, int terms, Rng& rng);

}  // namespace qem::resolve
