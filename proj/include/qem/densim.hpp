#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "qem/rng.hpp"

// Dense density-matrix simulation.
//
// Bit convention: qubit i is bit i of the computational-basis index, and
// character i of a Pauli string acts on qubit i.
namespace qem::densim {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

constexpr int kDefaultMaxQubits = 6;

// Upper bound on the register size accepted by QuantumState / ParamCircuit.
int max_qubits();
void set_max_qubits(int n);

class QuantumState {
public:
    // Validates Hermiticity, unit trace and PSD (tolerance tol).
    static QuantumState from_matrix(Matrix rho, double tol = 1e-10);
    // No validation; for results of channel maps that preserve the invariants.
    static QuantumState unchecked(Matrix rho);

    static QuantumState basis(int n, std::uint64_t index);
    static QuantumState maximally_mixed(int n);
    static QuantumState pure(const Vector& psi);  // psi is normalized internally
    static QuantumState plus(int n);

    int n() const { return n_; }
    Eigen::Index dim() const { return rho_.rows(); }
    const Matrix& rho() const { return rho_; }

    // Throws std::domain_error naming the first violated invariant.
    void validate(double tol = 1e-10) const;

private:
    QuantumState(int n, Matrix rho) : n_(n), rho_(std::move(rho)) {}
    int n_;
    Matrix rho_;
};

struct PauliTerm {
    double coeff;
    std::string pauli;
};

class Observable {
public:
    Observable(int n, std::vector<PauliTerm> terms);
    static Observable from_matrix(const Matrix& op);  // must be Hermitian
    static Observable pauli(const std::string& s, double coeff = 1.0);

    int n() const { return n_; }
    const std::vector<PauliTerm>& terms() const { return terms_; }
    const Matrix& matrix() const { return dense_; }

    double trace() const;
    double trace_sq() const;
    double norm_inf() const;
    bool is_diagonal() const;

private:
    int n_;
    std::vector<PauliTerm> terms_;
    Matrix dense_;
};

Matrix pauli_matrix(const std::string& s);

enum class GateKind { I, X, Y, Z, H, S, Sdg, T, RX, RY, RZ, CNOT, CZ, SWAP, RZZ };

bool is_rotation(GateKind k);
int arity(GateKind k);

// Rotation angle = coeff * theta[param] + angle when param >= 0, else angle.
// RX(a) = exp(-i a X/2) and likewise for RY, RZ; RZZ(a) = exp(-i a ZZ/2).
// CNOT control is qubits[0].
struct Gate {
    GateKind kind = GateKind::I;
    int q0 = 0;
    int q1 = -1;
    int param = -1;
    double coeff = 1.0;
    double angle = 0.0;

    static Gate one(GateKind k, int q) { return Gate{k, q}; }
    static Gate two(GateKind k, int a, int b) { return Gate{k, a, b}; }
    static Gate rot(GateKind k, int q, double a) { return Gate{k, q, -1, -1, 1.0, a}; }
    static Gate rot_param(GateKind k, int q, int slot, double coeff = 1.0) {
        return Gate{k, q, -1, slot, coeff, 0.0};
    }

    double resolved_angle(const std::vector<double>& theta) const;
};

Matrix gate_matrix(const Gate& g, const std::vector<double>& theta);

using Layer = std::vector<Gate>;

class ParamCircuit {
public:
    ParamCircuit() = default;
    explicit ParamCircuit(int n, std::vector<Layer> layers = {}, std::vector<double> theta = {});

    int n() const { return n_; }
    int num_layers() const { return static_cast<int>(layers_.size()); }
    int num_params() const { return num_params_; }
    const std::vector<Layer>& layers() const { return layers_; }
    const std::vector<double>& theta() const { return theta_; }

    void add_layer(Layer layer);
    ParamCircuit with_theta(std::vector<double> theta) const;
    // Replaces every parameter slot by its current numeric angle.
    ParamCircuit bound() const;
    bool fully_bound() const;
    // Throws unless every parameter slot has a value.
    void check_bound() const;

    Layer& mutable_layer(int i) { return layers_.at(static_cast<std::size_t>(i)); }

private:
    int n_ = 0;
    std::vector<Layer> layers_;
    std::vector<double> theta_;
    int num_params_ = 0;
};

enum class NoiseKind { none, local_depolarizing, global_depolarizing };

struct NoisySpec {
    NoiseKind kind = NoiseKind::none;
    std::vector<double> local_probs;
    double global_p = 0.0;
    double boost = 1.0;
    // Default: one noise layer before U_1 as well as after each layer. Off: exactly
    // one noise instance per unitary layer.
    bool leading_layer = true;

    static NoisySpec none();
    static NoisySpec local(std::vector<double> probs);
    static NoisySpec uniform_local(int n, double p);
    static NoisySpec global(double p);

    NoisySpec boosted(double a) const;

    // Probabilities after the boost; throws std::domain_error if a*p > 1.
    std::vector<double> effective_local(int n) const;
    double effective_global() const;

    // max(1 - p_i) for local, 1 - p for global, 1 for none; boost applied.
    double q(int n) const;
    int instances(int num_layers) const { return num_layers + (leading_layer ? 1 : 0); }
    void validate(int n) const;
};

struct Spectrum {
    std::vector<double> lambdas;  // descending
    double purity = 0.0;

    static Spectrum from_values(std::vector<double> v, double tol = 1e-10);
    int n() const;
};

// Matrix-level maps. These work on any square operator (not only states) so
// that quasi-probability and extrapolation maps can reuse them.
namespace ops {
void apply_gate(Matrix& m, const Gate& g, const std::vector<double>& theta);
void apply_unitary_left(Matrix& m, const Matrix& u, int q0, int q1 = -1);
void apply_unitary_right_adjoint(Matrix& m, const Matrix& u, int q0, int q1 = -1);
void depolarize_qubit(Matrix& m, int q, double p);
void depolarize_global(Matrix& m, double p);
void apply_pauli(Matrix& m, const std::string& pauli, int offset = 0);
void apply_noise(Matrix& m, const NoisySpec& noise, int n);
}  // namespace ops

QuantumState apply_unitary_layer(const QuantumState& s, const Layer& layer, const std::vector<double>& theta);
QuantumState apply_local_depolarizing(const QuantumState& s, const std::vector<double>& probs);
QuantumState apply_global_depolarizing(const QuantumState& s, double p);
QuantumState run_circuit(const ParamCircuit& c, const QuantumState& rho_in);
QuantumState run_noisy_circuit(const ParamCircuit& c, const NoisySpec& noise, const QuantumState& rho_in);

double expectation(const QuantumState& s, const Observable& obs);
double expectation(const Matrix& rho, const Matrix& obs);

struct PowerTrace {
    double tr_rho_m_o;
    double tr_rho_m;
};
PowerTrace power_trace(const QuantumState& s, int M, const Observable& obs);

double dominant_eigenvalue(const QuantumState& s);
double purity(const QuantumState& s);
Spectrum spectrum(const QuantumState& s);
// (1/2) sum |eig(a - b)|
double trace_distance(const QuantumState& a, const QuantumState& b);
// sum |eig(a - b)|, the convention of the concentration bound
double trace_norm_distance(const QuantumState& a, const QuantumState& b);

Matrix haar_random_unitary(int n, std::uint64_t seed);
Matrix haar_random_unitary(int n, Rng& rng);
Vector haar_random_state(int n, Rng& rng);

// Random layered circuit of RY/RZ rotations and a CZ ladder, parameters bound
// to uniform angles. Used by tests and verification recipes.
ParamCircuit random_circuit(int n, int layers, Rng& rng);

}  // namespace qem::densim
