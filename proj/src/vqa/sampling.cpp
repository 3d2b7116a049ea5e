#include <algorithm>
#include <cmath>
#include <bit>
#include <random>
#include <stdexcept>

#include "qem/vqa.hpp"

namespace qem::vqa {

namespace {

std::vector<double> probabilities(const densim::Matrix& rho) {
    std::vector<double> p(static_cast<std::size_t>(rho.rows()));
    for (Eigen::Index i = 0; i < rho.rows(); ++i) p[static_cast<std::size_t>(i)] = std::max(0.0, rho(i, i).real());
    return p;
}

// Multinomial draw as a chain of conditional binomials.
std::vector<std::uint64_t> multinomial(const std::vector<double>& p, std::uint64_t n, Rng& rng) {
    std::vector<std::uint64_t> counts(p.size(), 0);
    double mass = 0.0;
    for (double x : p) mass += x;
    std::uint64_t left = n;
    for (std::size_t i = 0; i + 1 < p.size() && left > 0; ++i) {
        if (p[i] <= 0.0) {
            mass -= p[i];
            continue;
        }
        const double r = mass > 0.0 ? std::clamp(p[i] / mass, 0.0, 1.0) : 1.0;
        std::binomial_distribution<std::uint64_t> b(left, r);
        counts[i] = b(rng.engine());
        left -= counts[i];
        mass -= p[i];
    }
    if (!p.empty()) counts.back() += left;
    return counts;
}

double parity_average(const std::vector<std::uint64_t>& counts, std::uint64_t mask, std::uint64_t total) {
    long double s = 0.0;
    for (std::size_t b = 0; b < counts.size(); ++b) {
        if (!counts[b]) continue;
        const bool odd = std::popcount(static_cast<std::uint64_t>(b) & mask) & 1;
        s += odd ? -static_cast<long double>(counts[b]) : static_cast<long double>(counts[b]);
    }
    return static_cast<double>(s / static_cast<long double>(total));
}

}  // namespace

std::vector<std::uint64_t> sample_counts(const QuantumState& s, std::uint64_t n_shots, Rng& rng) {
    if (n_shots < 1) throw std::invalid_argument("sample_counts: shots must be >= 1");
    return multinomial(probabilities(s.rho()), n_shots, rng);
}

double sample_expectation(const QuantumState& s, const Observable& obs, std::uint64_t n_shots, Rng& rng) {
    if (n_shots < 1) throw std::invalid_argument("sample_expectation: shots must be >= 1");
    if (obs.n() != s.n()) throw std::invalid_argument("sample_expectation: size mismatch");
    double value = 0.0;
    std::vector<std::uint64_t> z_counts;
    for (const auto& t : obs.terms()) {
        std::uint64_t mask = 0;
        bool z_only = true;
        for (std::size_t q = 0; q < t.pauli.size(); ++q) {
            if (t.pauli[q] == 'I') continue;
            mask |= std::uint64_t{1} << q;
            if (t.pauli[q] != 'Z') z_only = false;
        }
        if (mask == 0) {
            value += t.coeff;
            continue;
        }
        if (z_only) {
            if (z_counts.empty()) z_counts = sample_counts(s, n_shots, rng);
            value += t.coeff * parity_average(z_counts, mask, n_shots);
            continue;
        }
        // rotate X / Y factors onto Z, then read parities
        densim::Matrix m = s.rho();
        for (std::size_t q = 0; q < t.pauli.size(); ++q) {
            const int qi = static_cast<int>(q);
            if (t.pauli[q] == 'Y') densim::ops::apply_gate(m, densim::Gate::one(densim::GateKind::Sdg, qi), {});
            if (t.pauli[q] == 'X' || t.pauli[q] == 'Y')
                densim::ops::apply_gate(m, densim::Gate::one(densim::GateKind::H, qi), {});
        }
        auto counts = multinomial(probabilities(m), n_shots, rng);
        value += t.coeff * parity_average(counts, mask, n_shots);
    }
    return value;
}

std::vector<double> edge_correlations(const Graph& g, const std::vector<std::uint64_t>& counts) {
    std::uint64_t total = 0;
    for (auto c : counts) total += c;
    if (total == 0) throw std::invalid_argument("edge_correlations: no shots");
    std::vector<double> zz;
    zz.reserve(g.edges.size());
    for (auto [i, j] : g.edges) zz.push_back(parity_average(counts, (std::uint64_t{1} << i) | (std::uint64_t{1} << j), total));
    return zz;
}

std::vector<double> edge_correlations(const Graph& g, const QuantumState& s) {
    auto p = probabilities(s.rho());
    std::vector<double> zz;
    zz.reserve(g.edges.size());
    for (auto [i, j] : g.edges) {
        double v = 0.0;
        for (std::size_t b = 0; b < p.size(); ++b) v += ((((b >> i) ^ (b >> j)) & 1U) ? -p[b] : p[b]);
        zz.push_back(v);
    }
    return zz;
}

}  // namespace qem::vqa
