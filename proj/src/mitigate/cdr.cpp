#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "qem/mitigate.hpp"

namespace qem::mitigate {

MitigatedEstimate LinearAnsatz::estimate(double noisy, double noisy_shot_variance) const {
    MitigatedEstimate e;
    e.protocol = "linear";
    e.value = apply(noisy);
    e.gamma = a1 * a1;
    e.variance = e.gamma * noisy_shot_variance;
    e.params = {{"a1", a1}, {"a2", a2}};
    return e;
}

LinearAnsatz cdr_fit(const std::vector<std::pair<double, double>>& training) {
    if (training.size() < 2) throw std::invalid_argument("linear fit needs at least 2 training pairs");
    const double n = static_cast<double>(training.size());
    double mx = 0.0, my = 0.0, sq = 0.0;
    for (const auto& [y, x] : training) {
        mx += x;
        my += y;
        sq += x * x;
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (const auto& [y, x] : training) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if (sxx <= 1e-14 * (1.0 + sq)) throw std::domain_error("degenerate training set: noisy values do not vary");
    LinearAnsatz f;
    f.a1 = sxy / sxx;
    f.a2 = my - f.a1 * mx;
    f.training = training;
    for (const auto& [y, x] : training) {
        double r = y - f.apply(x);
        f.residual += r * r;
    }
    return f;
}

bool is_clifford_angle(double a, double tol) {
    double k = a / (std::numbers::pi / 2);
    return std::abs(k - std::round(k)) * (std::numbers::pi / 2) <= tol;
}

int count_nonclifford(const ParamCircuit& c) {
    int count = 0;
    for (const auto& layer : c.layers())
        for (const auto& g : layer)
            if (densim::is_rotation(g.kind) && !is_clifford_angle(g.resolved_angle(c.theta()))) ++count;
    return count;
}

std::vector<ParamCircuit> cdr_generate_training(const ParamCircuit& c, int max_nonclifford, int count, Rng& rng) {
    if (max_nonclifford < 0) throw std::invalid_argument("max_nonclifford must be >= 0");
    if (count < 1) throw std::invalid_argument("training count must be >= 1");
    ParamCircuit base = c.bound();
    std::vector<std::pair<int, int>> nonclifford;  // (layer, gate)
    for (int l = 0; l < base.num_layers(); ++l) {
        const auto& layer = base.layers()[static_cast<std::size_t>(l)];
        for (int g = 0; g < static_cast<int>(layer.size()); ++g) {
            const auto& gate = layer[static_cast<std::size_t>(g)];
            if (densim::is_rotation(gate.kind) && !is_clifford_angle(gate.angle)) nonclifford.emplace_back(l, g);
        }
    }
    const int excess = static_cast<int>(nonclifford.size()) - max_nonclifford;
    std::vector<ParamCircuit> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) {
        ParamCircuit t = base;
        if (excess > 0) {
            auto order = nonclifford;
            std::shuffle(order.begin(), order.end(), rng.engine());
            for (int j = 0; j < excess; ++j) {
                auto& gate = t.mutable_layer(order[static_cast<std::size_t>(j)].first)
                                 [static_cast<std::size_t>(order[static_cast<std::size_t>(j)].second)];
                const double quarter = std::numbers::pi / 2;
                double snapped = std::round(gate.angle / quarter);
                snapped = std::fmod(snapped, 4.0);
                if (snapped < 0) snapped += 4.0;
                gate.angle = snapped * quarter;
            }
        }
        out.push_back(std::move(t));
    }
    return out;
}

}  // namespace qem::mitigate
