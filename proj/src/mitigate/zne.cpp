#include <cmath>
#include <stdexcept>

#include "qem/mitigate.hpp"

namespace qem::mitigate {

namespace {
std::vector<double> unit_variances(std::size_t k, const std::vector<double>& given) {
    if (given.empty()) return std::vector<double>(k, 1.0);
    if (given.size() != k) throw std::invalid_argument("one variance per level required");
    for (double v : given)
        if (v < 0.0) throw std::invalid_argument("negative level variance");
    return given;
}

void finish(MitigatedEstimate& e, double base_var, double weight_sq_sum) {
    e.gamma = base_var > 0.0 ? e.variance / base_var : weight_sq_sum;
}
}  // namespace

double ExpLevel::weight() const {
    if (!(r > 0.0)) throw std::domain_error("exponential model needs r > 0");
    return std::pow(r, t);
}

ExtrapolationSpec ExtrapolationSpec::richardson(std::vector<double> factors) {
    ExtrapolationSpec s;
    s.model = Extrapolation::richardson;
    s.coeffs = richardson_coefficients(factors);
    s.factors = std::move(factors);
    return s;
}

ExtrapolationSpec ExtrapolationSpec::exponential(double a1, ExpLevel base, ExpLevel boost) {
    if (!(a1 > 1.0)) throw std::invalid_argument("boost factor must exceed 1");
    (void)base.weight();
    (void)boost.weight();
    ExtrapolationSpec s;
    s.model = Extrapolation::exponential;
    s.factors = {1.0, a1};
    s.exp_base = base;
    s.exp_boost = boost;
    return s;
}

ExtrapolationSpec ExtrapolationSpec::nibp(double a, double q, int L, double K) {
    if (!(a > 1.0)) throw std::invalid_argument("boost factor must exceed 1");
    if (!(q > 0.0)) throw std::domain_error("NIBP model needs q > 0");
    if (L < 0) throw std::invalid_argument("L must be >= 0");
    ExtrapolationSpec s;
    s.model = Extrapolation::nibp;
    s.factors = {1.0, a};
    s.q = q;
    s.L = L;
    s.K = K;
    return s;
}

std::vector<double> richardson_coefficients(const std::vector<double>& factors) {
    if (factors.size() < 2) throw std::invalid_argument("Richardson extrapolation needs at least 2 levels");
    for (std::size_t j = 0; j < factors.size(); ++j) {
        if (!(factors[j] > 0.0)) throw std::invalid_argument("noise factors must be positive");
        if (j > 0 && !(factors[j] > factors[j - 1]))
            throw std::invalid_argument("noise factors must be strictly increasing (duplicate level?)");
    }
    std::vector<double> beta(factors.size());
    for (std::size_t j = 0; j < factors.size(); ++j) {
        double b = 1.0;
        for (std::size_t l = 0; l < factors.size(); ++l)
            if (l != j) b *= factors[l] / (factors[l] - factors[j]);
        beta[j] = b;
    }
    return beta;
}

MitigatedEstimate zne_richardson(const std::vector<double>& values, const ExtrapolationSpec& spec,
                                 const std::vector<double>& level_variances) {
    if (spec.model != Extrapolation::richardson) throw std::invalid_argument("spec is not a Richardson spec");
    if (values.size() != spec.factors.size()) throw std::invalid_argument("one value per noise level required");
    std::vector<double> beta = spec.coeffs.empty() ? richardson_coefficients(spec.factors) : spec.coeffs;
    auto var = unit_variances(values.size(), level_variances);
    MitigatedEstimate e;
    e.protocol = "zne_richardson";
    double wsq = 0.0;
    for (std::size_t j = 0; j < values.size(); ++j) {
        e.value += beta[j] * values[j];
        e.variance += beta[j] * beta[j] * var[j];
        wsq += beta[j] * beta[j];
        e.params["a" + std::to_string(j)] = spec.factors[j];
    }
    finish(e, var[0], wsq);
    return e;
}

TwoLevelForm two_level_form(const ExtrapolationSpec& spec) {
    if (spec.factors.size() != 2) throw std::invalid_argument("two-level form needs exactly 2 levels");
    const double a = spec.factors[1];
    switch (spec.model) {
        case Extrapolation::richardson:
            if (spec.factors[0] != 1.0) throw std::invalid_argument("two-level form expects a_0 = 1");
            return {a, 1.0, a - 1.0};
        case Extrapolation::exponential:
            return {a * spec.exp_base.weight(), spec.exp_boost.weight(), a - 1.0};
        case Extrapolation::nibp: {
            double ql = std::pow(spec.q, -spec.L);
            return {ql, std::pow(a, spec.L + 1) * ql, 1.0 - a};
        }
    }
    throw std::logic_error("unknown extrapolation model");
}

MitigatedEstimate zne_exponential(const std::vector<double>& values, const ExtrapolationSpec& spec,
                                  const std::vector<double>& level_variances) {
    if (spec.model != Extrapolation::exponential) throw std::invalid_argument("spec is not an exponential spec");
    if (values.size() != 2) throw std::invalid_argument("exponential extrapolation uses exactly 2 levels");
    auto var = unit_variances(2, level_variances);
    TwoLevelForm f = two_level_form(spec);
    MitigatedEstimate e;
    e.protocol = "zne_exponential";
    e.value = (f.A * values[0] - f.B * values[1]) / f.D;
    e.variance = (f.A * f.A * var[0] + f.B * f.B * var[1]) / (f.D * f.D);
    e.params = {{"a1", spec.factors[1]}, {"A", f.A}, {"B", f.B}, {"D", f.D}};
    finish(e, var[0], f.gamma());
    return e;
}

MitigatedEstimate zne_nibp(const std::vector<double>& values, double fixed_point, const ExtrapolationSpec& spec,
                           const std::vector<double>& level_variances) {
    if (spec.model != Extrapolation::nibp) throw std::invalid_argument("spec is not a NIBP spec");
    if (!(spec.q > 0.0)) throw std::domain_error("NIBP model needs q > 0");
    if (values.size() != 2) throw std::invalid_argument("NIBP extrapolation uses exactly 2 levels");
    auto var = unit_variances(2, level_variances);
    TwoLevelForm f = two_level_form(spec);
    MitigatedEstimate e;
    e.protocol = "zne_nibp";
    e.value = (f.A * (values[0] - fixed_point) - f.B * (values[1] - fixed_point)) / f.D + spec.K;
    e.variance = (f.A * f.A * var[0] + f.B * f.B * var[1]) / (f.D * f.D);
    e.params = {{"a", spec.factors[1]}, {"q", spec.q}, {"L", spec.L}, {"K", spec.K}, {"c", f.c()}};
    finish(e, var[0], f.gamma());
    return e;
}

}  // namespace qem::mitigate
