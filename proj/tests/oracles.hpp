#pragma once

// Reference implementations that only use site positions, shared by the
// unit tests and the acceptance run.

#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

#include "qperc/lattice.hpp"

namespace oracle {

inline std::vector<std::vector<std::size_t>> geometric_adjacency(const qperc::LatticeSpec& spec, double d) {
    const std::size_t n = spec.site_count();
    std::vector<qperc::Position> pos;
    for (std::size_t i = 0; i < n; ++i) pos.push_back(qperc::site_coordinates(spec, qperc::site_at(spec, i)));
    std::vector<std::vector<std::size_t>> adj(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j && std::abs(std::hypot(pos[i].x - pos[j].x, pos[i].y - pos[j].y) - d) < 1e-9) adj[i].push_back(j);
    return adj;
}

// Component ids by depth-first flood fill; -1 for vacant sites.
inline std::vector<int> flood_fill(const std::vector<std::uint8_t>& occ,
                                   const std::vector<std::vector<std::size_t>>& adj) {
    std::vector<int> comp(occ.size(), -1);
    int next = 0;
    for (std::size_t s = 0; s < occ.size(); ++s) {
        if (!occ[s] || comp[s] >= 0) continue;
        std::vector<std::size_t> stack{s};
        comp[s] = next;
        while (!stack.empty()) {
            const auto u = stack.back();
            stack.pop_back();
            for (auto v : adj[u])
                if (occ[v] && comp[v] < 0) {
                    comp[v] = next;
                    stack.push_back(v);
                }
        }
        ++next;
    }
    return comp;
}

// Whether two labelings describe the same partition of the occupied sites.
inline bool same_partition(const std::vector<int>& a, const std::vector<std::int32_t>& b) {
    if (a.size() != b.size()) return false;
    std::vector<std::int64_t> ab(a.size() + 1, -2), ba(a.size() + 1, -2);
    for (std::size_t i = 0; i < a.size(); ++i) {
        if ((a[i] < 0) != (b[i] < 0)) return false;
        if (a[i] < 0) continue;
        auto& x = ab[static_cast<std::size_t>(a[i])];
        auto& y = ba[static_cast<std::size_t>(b[i])];
        if (x == -2) x = b[i];
        if (y == -2) y = a[i];
        if (x != b[i] || y != a[i]) return false;
    }
    return true;
}

// Corner-to-corner spanning: one cluster touches all four borders.
inline bool spans(const qperc::LatticeSpec& spec, const std::vector<std::uint8_t>& occ,
                  const std::vector<std::vector<std::size_t>>& adj) {
    const auto comp = flood_fill(occ, adj);
    std::set<int> top, bottom, left, right;
    for (std::size_t i = 0; i < occ.size(); ++i) {
        if (comp[i] < 0) continue;
        const auto s = qperc::site_at(spec, i);
        if (s.row == 0) top.insert(comp[i]);
        if (s.row == spec.rows - 1) bottom.insert(comp[i]);
        if (s.col == 0) left.insert(comp[i]);
        if (s.col == spec.cols - 1) right.insert(comp[i]);
    }
    for (int c : top)
        if (bottom.count(c) && left.count(c) && right.count(c)) return true;
    return false;
}

// Exact spanning probability of a small lattice by enumerating all patterns.
inline double enumerated_spanning_probability(const qperc::LatticeSpec& spec, double p) {
    const auto adj = geometric_adjacency(spec, spec.pitch_um);
    const std::size_t n = spec.site_count();
    double total = 0.0;
    for (std::uint64_t m = 0; m < (std::uint64_t{1} << n); ++m) {
        std::vector<std::uint8_t> occ(n);
        int k = 0;
        for (std::size_t i = 0; i < n; ++i) k += occ[i] = static_cast<std::uint8_t>((m >> i) & 1);
        if (spans(spec, occ, adj)) total += std::pow(p, k) * std::pow(1 - p, static_cast<int>(n) - k);
    }
    return total;
}

} // namespace oracle
