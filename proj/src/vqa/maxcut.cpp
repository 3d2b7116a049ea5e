#include <algorithm>
#include <limits>
#include <stdexcept>
#include <string>

#include "qem/vqa.hpp"

namespace qem::vqa {

Graph erdos_renyi(int n, double edge_prob, std::uint64_t seed, int max_attempts) {
    if (n < 2) throw std::invalid_argument("erdos_renyi: n must be >= 2");
    if (!(edge_prob >= 0.0 && edge_prob <= 1.0)) throw std::invalid_argument("erdos_renyi: probability outside [0,1]");
    Rng rng(seed);
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        Graph g{n, {}, attempt};
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (rng.uniform() < edge_prob) g.edges.emplace_back(i, j);
        if (!g.edges.empty()) return g;
    }
    throw std::runtime_error("erdos_renyi: no nonempty graph after " + std::to_string(max_attempts) + " draws");
}

MaxCutInstance maxcut_hamiltonian(const Graph& g) {
    if (g.edges.empty()) throw std::invalid_argument("maxcut_hamiltonian: empty edge set");
    const int n = g.n;
    std::vector<densim::PauliTerm> terms;
    terms.push_back({-0.5 * static_cast<double>(g.edges.size()), std::string(static_cast<std::size_t>(n), 'I')});
    for (auto [i, j] : g.edges) {
        if (i < 0 || j < 0 || i >= n || j >= n || i == j) throw std::invalid_argument("maxcut_hamiltonian: bad edge");
        std::string s(static_cast<std::size_t>(n), 'I');
        s[static_cast<std::size_t>(i)] = 'Z';
        s[static_cast<std::size_t>(j)] = 'Z';
        terms.push_back({0.5, s});
    }
    std::vector<double> diag(std::size_t{1} << n);
    double ground = std::numeric_limits<double>::infinity();
    for (std::size_t b = 0; b < diag.size(); ++b) {
        int cut = 0;
        for (auto [i, j] : g.edges) cut += static_cast<int>(((b >> i) ^ (b >> j)) & 1U);
        diag[b] = -static_cast<double>(cut);
        ground = std::min(ground, diag[b]);
    }
    return {g, Observable(n, std::move(terms)), std::move(diag), ground};
}

double maxcut_cost(const std::vector<double>& zz) {
    double c = 0.0;
    for (double z : zz) c -= 0.5 * (1.0 - z);
    return c;
}

}  // namespace qem::vqa
