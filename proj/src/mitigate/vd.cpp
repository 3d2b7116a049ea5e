#include <cmath>
#include <stdexcept>

#include "qem/mitigate.hpp"

namespace qem::mitigate {

MitigatedEstimate vd_estimate(const QuantumState& s, int M, const Observable& obs, VdProtocol protocol,
                              double noisy_shot_variance) {
    if (M < 2) throw std::invalid_argument("virtual distillation needs M >= 2");
    if (noisy_shot_variance < 0.0) throw std::invalid_argument("negative shot variance");
    auto pt = densim::power_trace(s, M, obs);
    MitigatedEstimate e;
    e.params["M"] = M;
    e.params["tr_rho_m"] = pt.tr_rho_m;
    if (protocol == VdProtocol::A) {
        if (pt.tr_rho_m < 1e-14) throw std::domain_error("Tr[rho^M] collapsed below 1e-14");
        e.protocol = "vd_a";
        e.value = pt.tr_rho_m_o / pt.tr_rho_m;
        e.gamma = 1.0 / (pt.tr_rho_m * pt.tr_rho_m);
        e.params["gamma_is_lower_bound"] = 1.0;
    } else {
        double lam = densim::dominant_eigenvalue(s);
        double lm = std::pow(lam, M);
        e.protocol = "vd_b";
        e.value = pt.tr_rho_m_o / lm;
        e.gamma = 1.0 / (lm * lm);
        e.params["lambda"] = lam;
    }
    e.variance = e.gamma * noisy_shot_variance;
    return e;
}

VdProbabilities vd_probabilities(const QuantumState& s, int M, const Observable& obs) {
    auto pt = densim::power_trace(s, M, obs);
    double c = densim::expectation(s, obs);
    return {(1.0 + c) / 2.0, (1.0 + pt.tr_rho_m_o) / 2.0, (1.0 + pt.tr_rho_m) / 2.0};
}

}  // namespace qem::mitigate
