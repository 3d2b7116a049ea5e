#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "qem/densim.hpp"

namespace qem::densim {

namespace {
std::atomic<int> g_max_qubits{kDefaultMaxQubits};

int qubits_for_dim(Eigen::Index d) {
    if (d <= 0 || (d & (d - 1)) != 0) throw std::invalid_argument("dimension is not a power of two");
    int n = 0;
    while ((Eigen::Index{1} << n) < d) ++n;
    return n;
}

void check_register(int n) {
    if (n < 1) throw std::invalid_argument("qubit count must be >= 1");
    if (n > max_qubits())
        throw std::invalid_argument("qubit count " + std::to_string(n) + " exceeds limit " +
                                    std::to_string(max_qubits()));
}
}  // namespace

int max_qubits() { return g_max_qubits.load(); }

void set_max_qubits(int n) {
    if (n < 1) throw std::invalid_argument("max qubits must be >= 1");
    g_max_qubits.store(n);
}

QuantumState QuantumState::from_matrix(Matrix rho, double tol) {
    if (rho.rows() != rho.cols()) throw std::invalid_argument("density matrix must be square");
    int n = qubits_for_dim(rho.rows());
    check_register(n);
    QuantumState s(n, std::move(rho));
    s.validate(tol);
    return s;
}

QuantumState QuantumState::unchecked(Matrix rho) {
    if (rho.rows() != rho.cols()) throw std::invalid_argument("density matrix must be square");
    int n = qubits_for_dim(rho.rows());
    return QuantumState(n, std::move(rho));
}

QuantumState QuantumState::basis(int n, std::uint64_t index) {
    check_register(n);
    Eigen::Index d = Eigen::Index{1} << n;
    if (index >= static_cast<std::uint64_t>(d)) throw std::out_of_range("basis index out of range");
    Matrix rho = Matrix::Zero(d, d);
    rho(static_cast<Eigen::Index>(index), static_cast<Eigen::Index>(index)) = 1.0;
    return QuantumState(n, std::move(rho));
}

QuantumState QuantumState::maximally_mixed(int n) {
    check_register(n);
    Eigen::Index d = Eigen::Index{1} << n;
    return QuantumState(n, Matrix::Identity(d, d) / static_cast<double>(d));
}

QuantumState QuantumState::pure(const Vector& psi) {
    int n = qubits_for_dim(psi.size());
    check_register(n);
    double norm = psi.norm();
    if (norm == 0.0) throw std::invalid_argument("zero state vector");
    Vector v = psi / norm;
    return QuantumState(n, v * v.adjoint());
}

QuantumState QuantumState::plus(int n) {
    check_register(n);
    Eigen::Index d = Eigen::Index{1} << n;
    return QuantumState(n, Matrix::Constant(d, d, 1.0 / static_cast<double>(d)));
}

void QuantumState::validate(double tol) const {
    if ((rho_ - rho_.adjoint()).cwiseAbs().maxCoeff() > tol) throw std::domain_error("state is not Hermitian");
    if (std::abs(rho_.trace() - cplx(1.0, 0.0)) > tol) throw std::domain_error("state trace is not 1");
    Eigen::SelfAdjointEigenSolver<Matrix> es(rho_, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -tol) throw std::domain_error("state is not positive semidefinite");
}

Spectrum Spectrum::from_values(std::vector<double> v, double tol) {
    if (v.empty()) throw std::invalid_argument("empty spectrum");
    (void)qubits_for_dim(static_cast<Eigen::Index>(v.size()));
    for (double x : v)
        if (x < -tol) throw std::domain_error("negative eigenvalue in spectrum");
    double sum = std::accumulate(v.begin(), v.end(), 0.0);
    if (std::abs(sum - 1.0) > tol) throw std::domain_error("spectrum does not sum to 1");
    for (double& x : v) x = std::max(x, 0.0);
    std::sort(v.begin(), v.end(), std::greater<>());
    Spectrum s;
    s.purity = 0.0;
    for (double x : v) s.purity += x * x;
    s.lambdas = std::move(v);
    return s;
}

int Spectrum::n() const { return qubits_for_dim(static_cast<Eigen::Index>(lambdas.size())); }

}  // namespace qem::densim
