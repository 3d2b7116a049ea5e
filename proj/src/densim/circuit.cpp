#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "qem/densim.hpp"

namespace qem::densim {

bool is_rotation(GateKind k) {
    return k == GateKind::RX || k == GateKind::RY || k == GateKind::RZ || k == GateKind::RZZ;
}

int arity(GateKind k) {
    switch (k) {
        case GateKind::CNOT:
        case GateKind::CZ:
        case GateKind::SWAP:
        case GateKind::RZZ:
            return 2;
        default:
            return 1;
    }
}

double Gate::resolved_angle(const std::vector<double>& theta) const {
    if (param < 0) return angle;
    if (static_cast<std::size_t>(param) >= theta.size())
        throw std::invalid_argument("unbound parameter slot " + std::to_string(param));
    return coeff * theta[static_cast<std::size_t>(param)] + angle;
}

Matrix gate_matrix(const Gate& g, const std::vector<double>& theta) {
    using std::cos, std::sin;
    const cplx i(0.0, 1.0);
    const double r2 = std::numbers::sqrt2 / 2.0;
    Matrix m;
    if (arity(g.kind) == 1) m = Matrix::Zero(2, 2);
    else m = Matrix::Zero(4, 4);
    switch (g.kind) {
        case GateKind::I: m << 1, 0, 0, 1; break;
        case GateKind::X: m << 0, 1, 1, 0; break;
        case GateKind::Y: m << 0, -i, i, 0; break;
        case GateKind::Z: m << 1, 0, 0, -1; break;
        case GateKind::H: m << r2, r2, r2, -r2; break;
        case GateKind::S: m << 1, 0, 0, i; break;
        case GateKind::Sdg: m << 1, 0, 0, -i; break;
        case GateKind::T: m << 1, 0, 0, std::exp(i * (std::numbers::pi / 4)); break;
        case GateKind::RX: {
            double a = g.resolved_angle(theta) / 2;
            m << cos(a), -i * sin(a), -i * sin(a), cos(a);
            break;
        }
        case GateKind::RY: {
            double a = g.resolved_angle(theta) / 2;
            m << cos(a), -sin(a), sin(a), cos(a);
            break;
        }
        case GateKind::RZ: {
            double a = g.resolved_angle(theta) / 2;
            m << std::exp(-i * a), 0, 0, std::exp(i * a);
            break;
        }
        // Two-qubit basis index: bit(q0) + 2 * bit(q1).
        case GateKind::CNOT:
            m(0, 0) = 1; m(3, 1) = 1; m(2, 2) = 1; m(1, 3) = 1;
            break;
        case GateKind::CZ:
            m(0, 0) = 1; m(1, 1) = 1; m(2, 2) = 1; m(3, 3) = -1;
            break;
        case GateKind::SWAP:
            m(0, 0) = 1; m(2, 1) = 1; m(1, 2) = 1; m(3, 3) = 1;
            break;
        case GateKind::RZZ: {
            double a = g.resolved_angle(theta) / 2;
            m(0, 0) = std::exp(-i * a); m(1, 1) = std::exp(i * a);
            m(2, 2) = std::exp(i * a); m(3, 3) = std::exp(-i * a);
            break;
        }
    }
    return m;
}

ParamCircuit::ParamCircuit(int n, std::vector<Layer> layers, std::vector<double> theta)
    : n_(n), theta_(std::move(theta)) {
    if (n < 1) throw std::invalid_argument("circuit needs n >= 1");
    if (n > max_qubits()) throw std::invalid_argument("circuit exceeds qubit limit");
    for (auto& l : layers) add_layer(std::move(l));
}

void ParamCircuit::add_layer(Layer layer) {
    for (const auto& g : layer) {
        int k = arity(g.kind);
        if (g.q0 < 0 || g.q0 >= n_) throw std::out_of_range("gate qubit out of range");
        if (k == 2 && (g.q1 < 0 || g.q1 >= n_ || g.q1 == g.q0))
            throw std::out_of_range("two-qubit gate has invalid second qubit");
        if (g.param >= 0) {
            if (!is_rotation(g.kind)) throw std::invalid_argument("parameter slot on a fixed gate");
            num_params_ = std::max(num_params_, g.param + 1);
        }
    }
    layers_.push_back(std::move(layer));
}

ParamCircuit ParamCircuit::with_theta(std::vector<double> theta) const {
    ParamCircuit c = *this;
    c.theta_ = std::move(theta);
    return c;
}

bool ParamCircuit::fully_bound() const { return theta_.size() >= static_cast<std::size_t>(num_params_); }

void ParamCircuit::check_bound() const {
    if (!fully_bound())
        throw std::invalid_argument("circuit has " + std::to_string(num_params_) + " parameter slots but " +
                                    std::to_string(theta_.size()) + " values");
}

ParamCircuit ParamCircuit::bound() const {
    check_bound();
    ParamCircuit c(n_);
    for (const auto& layer : layers_) {
        Layer out = layer;
        for (auto& g : out) {
            if (g.param >= 0) {
                g.angle = g.resolved_angle(theta_);
                g.param = -1;
                g.coeff = 1.0;
            }
        }
        c.add_layer(std::move(out));
    }
    return c;
}

ParamCircuit random_circuit(int n, int layers, Rng& rng) {
    ParamCircuit c(n);
    std::vector<double> theta;
    int slot = 0;
    for (int l = 0; l < layers; ++l) {
        Layer layer;
        for (int q = 0; q < n; ++q) {
            layer.push_back(Gate::rot_param(GateKind::RY, q, slot++));
            theta.push_back(rng.uniform(0.0, 2 * std::numbers::pi));
            layer.push_back(Gate::rot_param(GateKind::RZ, q, slot++));
            theta.push_back(rng.uniform(0.0, 2 * std::numbers::pi));
        }
        for (int q = l % 2; q + 1 < n; q += 2) layer.push_back(Gate::two(GateKind::CZ, q, q + 1));
        c.add_layer(std::move(layer));
    }
    return c.with_theta(std::move(theta));
}

}  // namespace qem::densim
