#include <cmath>
#include <limits>
#include <stdexcept>

#include "qem/resolve.hpp"

namespace qem::resolve {

std::uint64_t shots_to_resolve(double delta, double variance_per_shot, double precision_fraction) {
    if (!(precision_fraction > 0.0 && precision_fraction <= 1.0))
        throw std::invalid_argument("precision fraction must lie in (0,1]");
    if (!(variance_per_shot >= 0.0)) throw std::invalid_argument("variance must be >= 0");
    if (delta == 0.0 || !std::isfinite(delta)) throw std::domain_error("unresolvable: cost difference is zero");
    if (variance_per_shot == 0.0) return 1;
    const double target = precision_fraction * std::abs(delta);
    const double x = 2.0 * variance_per_shot / (target * target);
    if (x >= static_cast<double>(std::numeric_limits<std::uint64_t>::max()))
        return std::numeric_limits<std::uint64_t>::max();
    auto n = static_cast<std::uint64_t>(std::ceil(x));
    // ceil can overshoot by one when x is an integer up to rounding
    if (n > 1 && std::sqrt(2.0 * variance_per_shot / static_cast<double>(n - 1)) <= target * (1.0 + 1e-12)) --n;
    return std::max<std::uint64_t>(n, 1);
}

}  // namespace qem::resolve
