#include <map>
#include <stdexcept>

#include "qem/densim.hpp"

namespace qem::densim {

namespace {
void check_pauli(const std::string& s) {
    if (s.empty()) throw std::invalid_argument("empty Pauli string");
    for (char c : s)
        if (c != 'I' && c != 'X' && c != 'Y' && c != 'Z')
            throw std::invalid_argument("bad Pauli character '" + std::string(1, c) + "'");
}
}  // namespace

Matrix pauli_matrix(const std::string& s) {
    check_pauli(s);
    const int n = static_cast<int>(s.size());
    const Eigen::Index d = Eigen::Index{1} << n;
    Eigen::Index flip = 0;
    for (int i = 0; i < n; ++i)
        if (s[i] == 'X' || s[i] == 'Y') flip |= Eigen::Index{1} << i;
    Matrix m = Matrix::Zero(d, d);
    for (Eigen::Index b = 0; b < d; ++b) {
        cplx phase = 1.0;
        for (int i = 0; i < n; ++i) {
            bool bit = (b >> i) & 1;
            if (s[i] == 'Z' && bit) phase = -phase;
            if (s[i] == 'Y') phase *= bit ? cplx(0, -1) : cplx(0, 1);
        }
        m(b ^ flip, b) = phase;
    }
    return m;
}

Observable::Observable(int n, std::vector<PauliTerm> terms) : n_(n), terms_(std::move(terms)) {
    if (n < 1) throw std::invalid_argument("observable needs n >= 1");
    if (terms_.empty()) throw std::invalid_argument("observable needs at least one term");
    const Eigen::Index d = Eigen::Index{1} << n;
    dense_ = Matrix::Zero(d, d);
    for (const auto& t : terms_) {
        if (static_cast<int>(t.pauli.size()) != n) throw std::invalid_argument("Pauli string length != n");
        dense_ += t.coeff * pauli_matrix(t.pauli);
    }
}

Observable Observable::from_matrix(const Matrix& op) {
    if (op.rows() != op.cols()) throw std::invalid_argument("observable must be square");
    if ((op - op.adjoint()).cwiseAbs().maxCoeff() > 1e-10) throw std::invalid_argument("observable is not Hermitian");
    Eigen::Index d = op.rows();
    int n = 0;
    while ((Eigen::Index{1} << n) < d) ++n;
    if ((Eigen::Index{1} << n) != d) throw std::invalid_argument("dimension is not a power of two");
    Observable o(n, {{0.0, std::string(static_cast<std::size_t>(n), 'I')}});
    o.terms_.clear();
    o.dense_ = op;
    return o;
}

Observable Observable::pauli(const std::string& s, double coeff) {
    return Observable(static_cast<int>(s.size()), {{coeff, s}});
}

double Observable::trace() const {
    if (terms_.empty()) return dense_.trace().real();
    double d = static_cast<double>(dense_.rows());
    double t = 0.0;
    for (const auto& term : terms_)
        if (term.pauli.find_first_not_of('I') == std::string::npos) t += term.coeff;
    return d * t;
}

double Observable::trace_sq() const {
    if (terms_.empty()) return (dense_ * dense_).trace().real();
    // Distinct Pauli strings are trace-orthogonal.
    std::map<std::string, double> merged;
    for (const auto& term : terms_) merged[term.pauli] += term.coeff;
    double s = 0.0;
    for (const auto& [_, c] : merged) s += c * c;
    return static_cast<double>(dense_.rows()) * s;
}

double Observable::norm_inf() const {
    Eigen::SelfAdjointEigenSolver<Matrix> es(dense_, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

bool Observable::is_diagonal() const {
    if (!terms_.empty()) {
        for (const auto& t : terms_)
            if (t.pauli.find_first_of("XY") != std::string::npos) return false;
        return true;
    }
    Matrix off = dense_;
    off.diagonal().setZero();
    return off.cwiseAbs().maxCoeff() == 0.0;
}

}  // namespace qem::densim
