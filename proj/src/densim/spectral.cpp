#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qem/densim.hpp"

namespace qem::densim {

namespace {
// Eigenvalues below -1e-12 are treated as numerical drift: clamped to zero,
// then the spectrum is renormalized to unit trace.
Eigen::VectorXd cleaned(const Eigen::VectorXd& ev) {
    Eigen::VectorXd out = ev;
    for (Eigen::Index i = 0; i < out.size(); ++i)
        if (out[i] < -1e-12) out[i] = 0.0;
    double s = out.sum();
    if (s <= 0.0) throw std::domain_error("state has no positive spectrum");
    return out / s;
}
}  // namespace

PowerTrace power_trace(const QuantumState& s, int M, const Observable& obs) {
    if (M < 1) throw std::invalid_argument("power M must be >= 1");
    if (s.n() != obs.n()) throw std::invalid_argument("state and observable sizes differ");
    Eigen::SelfAdjointEigenSolver<Matrix> es(s.rho());
    Eigen::VectorXd lam = cleaned(es.eigenvalues());
    const Matrix& V = es.eigenvectors();
    Matrix ov = V.adjoint() * obs.matrix() * V;
    PowerTrace out{0.0, 0.0};
    for (Eigen::Index k = 0; k < lam.size(); ++k) {
        double w = std::pow(lam[k], M);
        out.tr_rho_m += w;
        out.tr_rho_m_o += w * ov(k, k).real();
    }
    return out;
}

double dominant_eigenvalue(const QuantumState& s) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(s.rho(), Eigen::EigenvaluesOnly);
    return cleaned(es.eigenvalues()).maxCoeff();
}

double purity(const QuantumState& s) {
    // Tr[rho^2] = sum |rho_ij|^2 for Hermitian rho
    return s.rho().squaredNorm();
}

Spectrum spectrum(const QuantumState& s) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(s.rho(), Eigen::EigenvaluesOnly);
    Eigen::VectorXd lam = cleaned(es.eigenvalues());
    return Spectrum::from_values(std::vector<double>(lam.data(), lam.data() + lam.size()), 1e-9);
}

double trace_norm_distance(const QuantumState& a, const QuantumState& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("dimension mismatch");
    Matrix diff = a.rho() - b.rho();
    Eigen::SelfAdjointEigenSolver<Matrix> es(diff, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().sum();
}

double trace_distance(const QuantumState& a, const QuantumState& b) { return 0.5 * trace_norm_distance(a, b); }

Matrix haar_random_unitary(int n, std::uint64_t seed) {
    Rng rng(seed);
    return haar_random_unitary(n, rng);
}

Matrix haar_random_unitary(int n, Rng& rng) {
    if (n < 1) throw std::invalid_argument("n must be >= 1");
    const Eigen::Index d = Eigen::Index{1} << n;
    Matrix z(d, d);
    for (Eigen::Index j = 0; j < d; ++j)
        for (Eigen::Index i = 0; i < d; ++i) z(i, j) = cplx(rng.normal(), rng.normal()) / std::sqrt(2.0);
    Eigen::HouseholderQR<Matrix> qr(z);
    Matrix q = qr.householderQ();
    const Matrix& r = qr.matrixQR();
    for (Eigen::Index j = 0; j < d; ++j) {
        cplx rjj = r(j, j);
        double mag = std::abs(rjj);
        q.col(j) *= mag > 0 ? rjj / mag : cplx(1.0);
    }
    return q;
}

Vector haar_random_state(int n, Rng& rng) {
    const Eigen::Index d = Eigen::Index{1} << n;
    Vector v(d);
    for (Eigen::Index i = 0; i < d; ++i) v[i] = cplx(rng.normal(), rng.normal());
    return v / v.norm();
}

}  // namespace qem::densim
