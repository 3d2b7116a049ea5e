#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "qem/resolve.hpp"

namespace qem::resolve {

namespace {
void require(bool ok, const std::string& what) {
    if (!ok) throw std::domain_error("outside validity region: " + what);
}

int as_int(double x, const std::string& key) {
    double r = std::round(x);
    require(std::abs(r - x) < 1e-9, key + " must be an integer");
    return static_cast<int>(r);
}

double pow2(int n) { return std::ldexp(1.0, n); }
}  // namespace

double BoundSpec::at(const std::string& key) const {
    auto it = params.find(key);
    if (it == params.end()) throw std::invalid_argument("bound '" + name + "' needs parameter '" + key + "'");
    return it->second;
}

double BoundSpec::get(const std::string& key, double fallback) const {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
}

std::string BoundSpec::describe() const {
    std::ostringstream os;
    os.precision(10);
    bool first = true;
    for (const auto& [k, v] : params) {
        if (!first) os << ';';
        os << k << '=' << v;
        first = false;
    }
    return os.str();
}

const std::vector<std::string>& bound_names() {
    static const std::vector<std::string> names = {"Gamma_VD",        "G_VD",      "chi_PEC_global",
                                                   "Q_PEC",           "chi_ZNE_depol", "chi_ZNE_avg",
                                                   "chi_ZNE_3level",  "G_thm1",    "chi_avg_III",
                                                   "chi_PEC_local"};
    return names;
}

double gamma_vd(int n, int M, double p) {
    require(n >= 1, "n >= 1");
    require(M >= 2, "M >= 2");
    require(p >= 0.0 && p < 1.0, "p in [0,1)");
    const double q = 1.0 - p;
    const double r = p / pow2(n);
    // ((q+r)^M - r^M) / q as a geometric sum, free of cancellation
    double sum = 0.0;
    for (int k = 0; k < M; ++k) sum += std::pow(q + r, k) * std::pow(r, M - 1 - k);
    return sum * sum;
}

double g_vd(int n, int M, double P) {
    require(n >= 1, "n >= 1");
    require(M >= 2, "M >= 2");
    const double d = pow2(n);
    require(P > 1.0 / d && P <= 1.0 + 1e-12, "P in (1/2^n, 1]");
    if (n == 1) {
        const double s = std::sqrt(std::max(0.0, 2.0 * P - 1.0));
        const double diff = std::pow(1.0 + s, M) - std::pow(1.0 - s, M);
        return diff * diff / (std::pow(2.0, 2 * M) * (2.0 * P - 1.0));
    }
    const double e = P - 1.0 / d;
    const double first = std::pow(P, M) * (1.0 - 1.0 / d) / e;
    double second;
    if (M == 2) {
        const double g2 = std::pow((d - 1.0) / d, 2) + std::pow(1.0 / d, 2);
        // last term uses (P - 1/2^n), as obtained in the derivation
        second = 4.0 / (d * d) + 4.0 / std::pow(2.0, n / 2.0) * g2 * std::sqrt(e) + d * g2 * g2 * e;
    } else {
        const double diff = std::pow(std::sqrt(2.0 * e) + 1.0 / d, M) - std::pow(1.0 / d, M);
        second = d / 4.0 * diff * diff / e;
    }
    return std::min(first, second);
}

double chi_pec_global(int n, double p) {
    require(n >= 1, "n >= 1");
    require(p >= 0.0 && p <= 1.0, "p in [0,1]");
    const double d2 = pow2(2 * n);
    return d2 / (d2 - p * (2.0 - p));
}

double q_pec(double p) {
    require(p >= 0.0 && p <= 1.0, "p in [0,1]");
    const double s = p * (2.0 - p);
    return 1.0 - 3.0 * s / (4.0 - s);
}

double chi_zne_depol(double c, double a1, double p, int L) {
    require(c > 0.0, "c > 0");
    require(a1 > 1.0, "a1 > 1");
    require(L >= 1, "L >= 1");
    require(p >= 0.0 && p < 1.0 && a1 * p <= 1.0, "p in [0,1) with a1*p <= 1");
    const double R = std::pow((1.0 - a1 * p) / (1.0 - p), L);
    return (c - R) * (c - R) / (c * c + 1.0);
}

double chi_zne_avg(double z, double c) {
    require(c > 0.0, "c > 0");
    return (z - c) * (z - c) / (c * c + 1.0);
}

double chi_zne_3level_avg(double a1, double a2, double z1, double z2) {
    require(a1 > 1.0 && a2 > a1, "1 < a1 < a2");
    const double num = a1 * a2 * (a2 - a1) - a2 * (a2 - 1.0) * z1 + a1 * (a1 - 1.0) * z2;
    const double den = a1 * a1 * a2 * a2 * (a2 - a1) * (a2 - a1) + a2 * a2 * (a2 - 1.0) * (a2 - 1.0) +
                       a1 * a1 * (a1 - 1.0) * (a1 - 1.0);
    return num * num / den;
}

double chi_zne_3level(double a1, double a2, double p, int L) {
    require(L >= 1, "L >= 1");
    require(p >= 0.0 && p < 1.0 && a2 * p <= 1.0, "p in [0,1) with a2*p <= 1");
    const double R1 = std::pow((1.0 - a1 * p) / (1.0 - p), L);
    const double R2 = std::pow((1.0 - a2 * p) / (1.0 - p), L);
    return chi_zne_3level_avg(a1, a2, R1, R2);
}

double g_thm1(double norm_x, int M, int n, double q, int L) {
    require(norm_x >= 0.0, "||X|| >= 0");
    require(M >= 1 && n >= 1 && L >= 0, "M, n >= 1 and L >= 0");
    require(q >= 0.0 && q <= 1.0, "q in [0,1]");
    return std::sqrt(std::log(4.0)) * norm_x * M * std::sqrt(static_cast<double>(n)) * std::pow(q, L + 1);
}

double chi_avg_iii(double c, double P_a, double P_1, int n) {
    require(c > 0.0, "c > 0");
    const double d = pow2(n);
    require(P_1 > 1.0 / d, "P(1) > 1/2^n");
    return (c * c + (P_a - 1.0 / d) / (P_1 - 1.0 / d)) / (c * c + 1.0);
}

double chi_pec_local(double b, double p) {
    require(b > 0.0, "b > 0");
    require(p >= 0.0 && p <= 1.0, "p in [0,1]");
    require(std::abs(1.0 - b * p) > 0.0, "b*p != 1");
    return 4.0 * (1.0 - p) * (1.0 - p) / ((4.0 - 2.0 * p + p * p) * (1.0 - b * p) * (1.0 - b * p));
}

double pec_local_threshold(double p) {
    const double s = p * (2.0 - p);
    return 1.0 + s / (4.0 - s);
}

double eval_bound(const BoundSpec& s) {
    const auto& k = s.name;
    if (k == "Gamma_VD") return gamma_vd(as_int(s.at("n"), "n"), as_int(s.at("M"), "M"), s.at("p"));
    if (k == "G_VD") return g_vd(as_int(s.at("n"), "n"), as_int(s.at("M"), "M"), s.at("P"));
    if (k == "chi_PEC_global") return chi_pec_global(as_int(s.at("n"), "n"), s.at("p"));
    if (k == "Q_PEC") {
        const double n = s.get("n", 1), L = s.get("L", 1), A = s.get("A", 1), q = s.get("q", 1);
        require(A != 0.0 && q > 0.0, "A != 0 and q > 0");
        return std::pow(q_pec(s.at("p")), n * L) / (A * A * std::pow(q, 2 * L));
    }
    if (k == "chi_ZNE_depol") return chi_zne_depol(s.at("c"), s.at("a1"), s.at("p"), as_int(s.at("L"), "L"));
    if (k == "chi_ZNE_avg") return chi_zne_avg(s.at("z"), s.at("c"));
    if (k == "chi_ZNE_3level") {
        if (s.params.count("z1")) return chi_zne_3level_avg(s.at("a1"), s.at("a2"), s.at("z1"), s.at("z2"));
        return chi_zne_3level(s.at("a1"), s.at("a2"), s.at("p"), as_int(s.at("L"), "L"));
    }
    if (k == "G_thm1")
        return g_thm1(s.at("normX"), as_int(s.at("M"), "M"), as_int(s.at("n"), "n"), s.at("q"), as_int(s.at("L"), "L"));
    if (k == "chi_avg_III") return chi_avg_iii(s.at("c"), s.at("P_a"), s.at("P_1"), as_int(s.at("n"), "n"));
    if (k == "chi_PEC_local") return chi_pec_local(s.at("b"), s.at("p"));
    throw std::invalid_argument("unknown bound '" + k + "'");
}

}  // namespace qem::resolve
