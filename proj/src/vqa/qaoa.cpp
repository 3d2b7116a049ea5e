#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qem/vqa.hpp"

namespace qem::vqa {

using densim::Gate;
using densim::GateKind;
using densim::Layer;

namespace {

// Greedy ASAP placement: each gate goes into the first layer after the
// last one touching its qubits.
class Scheduler {
public:
    explicit Scheduler(int n) : next_(static_cast<std::size_t>(n), 0) {}

    void add(const Gate& g) {
        auto& a = next_[static_cast<std::size_t>(g.q0)];
        std::size_t at = a;
        if (g.q1 >= 0) at = std::max(at, next_[static_cast<std::size_t>(g.q1)]);
        if (at >= layers_.size()) layers_.resize(at + 1);
        layers_[at].push_back(g);
        a = at + 1;
        if (g.q1 >= 0) next_[static_cast<std::size_t>(g.q1)] = at + 1;
    }

    std::vector<Layer> take() { return std::move(layers_); }

private:
    std::vector<std::size_t> next_;
    std::vector<Layer> layers_;
};

}  // namespace

ParamCircuit build_qaoa_circuit(const MaxCutInstance& inst, const QAOAConfig& cfg) {
    if (cfg.rounds < 1) throw std::invalid_argument("build_qaoa_circuit: rounds must be >= 1");
    if (!cfg.angles.empty() && cfg.angles.size() != static_cast<std::size_t>(2 * cfg.rounds))
        throw std::invalid_argument("build_qaoa_circuit: expected 2p angles");
    const int n = inst.graph.n;
    Scheduler sched(n);

    // pos[logical] = wire, wire_of inverse
    std::vector<int> pos(static_cast<std::size_t>(n)), at(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) pos[static_cast<std::size_t>(i)] = at[static_cast<std::size_t>(i)] = i;
    auto swap_wires = [&](int w) {
        sched.add(Gate::two(GateKind::SWAP, w, w + 1));
        int a = at[static_cast<std::size_t>(w)], b = at[static_cast<std::size_t>(w + 1)];
        std::swap(at[static_cast<std::size_t>(w)], at[static_cast<std::size_t>(w + 1)]);
        pos[static_cast<std::size_t>(a)] = w + 1;
        pos[static_cast<std::size_t>(b)] = w;
    };

    for (int j = 0; j < cfg.rounds; ++j) {
        // exp(i gamma/2 Z_a Z_b) = CNOT . RZ(-gamma) . CNOT up to global phase
        for (auto [u, v] : inst.graph.edges) {
            int a = u, b = v;
            if (cfg.swap_network) {
                while (std::abs(pos[static_cast<std::size_t>(u)] - pos[static_cast<std::size_t>(v)]) > 1) {
                    int pu = pos[static_cast<std::size_t>(u)], pv = pos[static_cast<std::size_t>(v)];
                    swap_wires(pu < pv ? pu : pu - 1);
                }
                a = pos[static_cast<std::size_t>(u)];
                b = pos[static_cast<std::size_t>(v)];
            }
            sched.add(Gate::two(GateKind::CNOT, a, b));
            sched.add(Gate::rot_param(GateKind::RZ, b, 2 * j, -1.0));
            sched.add(Gate::two(GateKind::CNOT, a, b));
        }
        // exp(i beta X) = RX(-2 beta)
        for (int q = 0; q < n; ++q)
            sched.add(Gate::rot_param(GateKind::RX, cfg.swap_network ? pos[static_cast<std::size_t>(q)] : q, 2 * j + 1, -2.0));
    }
    if (cfg.swap_network) {
        // restore logical order so observables act on the original labels
        for (int i = 0; i < n; ++i)
            for (int w = 0; w + 1 < n - i; ++w)
                if (at[static_cast<std::size_t>(w)] > at[static_cast<std::size_t>(w + 1)]) swap_wires(w);
    }
    ParamCircuit c(n, sched.take(), cfg.angles);
    return c;
}

densim::Vector simulate_statevector(const ParamCircuit& c, const densim::Vector& psi_in) {
    c.check_bound();
    densim::Vector psi = psi_in;
    const auto dim = psi.size();
    for (const auto& layer : c.layers()) {
        for (const auto& g : layer) {
            auto u = densim::gate_matrix(g, c.theta());
            if (densim::arity(g.kind) == 1) {
                const Eigen::Index m = Eigen::Index{1} << g.q0;
                for (Eigen::Index i = 0; i < dim; ++i) {
                    if (i & m) continue;
                    auto x0 = psi[i], x1 = psi[i | m];
                    psi[i] = u(0, 0) * x0 + u(0, 1) * x1;
                    psi[i | m] = u(1, 0) * x0 + u(1, 1) * x1;
                }
            } else {
                const Eigen::Index m0 = Eigen::Index{1} << g.q0, m1 = Eigen::Index{1} << g.q1;
                for (Eigen::Index i = 0; i < dim; ++i) {
                    if (i & (m0 | m1)) continue;
                    const Eigen::Index idx[4] = {i, i | m0, i | m1, i | m0 | m1};
                    densim::cplx x[4], y[4];
                    for (int k = 0; k < 4; ++k) x[k] = psi[idx[k]];
                    for (int r = 0; r < 4; ++r) {
                        y[r] = 0;
                        for (int k = 0; k < 4; ++k) y[r] += u(r, k) * x[k];
                    }
                    for (int k = 0; k < 4; ++k) psi[idx[k]] = y[k];
                }
            }
        }
    }
    return psi;
}

double exact_energy(const MaxCutInstance& inst, const ParamCircuit& c) {
    const int n = inst.graph.n;
    densim::Vector plus = densim::Vector::Constant(Eigen::Index{1} << n, densim::cplx(1.0, 0.0));
    plus /= std::sqrt(static_cast<double>(plus.size()));
    auto psi = simulate_statevector(c, plus);
    double e = 0.0;
    for (Eigen::Index i = 0; i < psi.size(); ++i) e += std::norm(psi[i]) * inst.diagonal[static_cast<std::size_t>(i)];
    return e;
}

}  // namespace qem::vqa
