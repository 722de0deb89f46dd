#pragma once

// Classical counterpart: liquid pumped into the injection site spreads at
// constant speed through pipes joining nearest-neighbour occupied sites.
// One propagation step advances the front by one pipe, so the covered set
// after t steps is the BFS ball of radius t in the occupied nearest-neighbour
// graph. There is no tunnelling across vacancies.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "qperc/error.hpp"
#include "qperc/lattice.hpp"
#include "qperc/rng.hpp"

namespace qperc {

struct FlowFront {
    std::vector<SiteIndex> covered;  // row-major order
    long steps = 0;

    std::size_t size() const noexcept { return covered.size(); }
};

/// Graph distance from the injection to every site over occupied
/// nearest-neighbour pipes; -1 for unreachable or vacant sites.
template <OccupancyGrid G>
std::vector<long> pipe_distances(const G& grid, SiteIndex injection) {
    const LatticeSpec& spec = grid.spec();
    if (!grid.occupied(injection)) throw DomainError("injection site is vacant");
    std::vector<long> dist(spec.site_count(), -1);
    std::deque<SiteIndex> queue{injection};
    dist[flat_index(spec, injection)] = 0;
    while (!queue.empty()) {
        const SiteIndex s = queue.front();
        queue.pop_front();
        const long d = dist[flat_index(spec, s)];
        for (const SiteIndex n : lattice_neighbors(spec, s, NeighborKind::nearest)) {
            auto& dn = dist[flat_index(spec, n)];
            if (dn < 0 && grid.occupied(n)) {
                dn = d + 1;
                queue.push_back(n);
            }
        }
    }
    return dist;
}

inline FlowFront flow_front(const Lattice& lattice, long steps) {
    if (steps < 0) throw DomainError("propagation step must be non-negative");
    const auto dist = pipe_distances(lattice, lattice.injection());
    FlowFront front;
    front.steps = steps;
    for (std::size_t i = 0; i < dist.size(); ++i)
        if (dist[i] >= 0 && dist[i] <= steps) front.covered.push_back(site_at(lattice.spec(), i));
    return front;
}

/// sum c^2 / (sum c)^2 for a constant c over N covered sites, i.e. 1/N.
inline double classical_ipr(const FlowFront& front) {
    if (front.covered.empty()) throw DomainError("flow front covers no site");
    return 1.0 / static_cast<double>(front.covered.size());
}

/// sqrt(N)
inline double classical_effective_width(const FlowFront& front) {
    if (front.covered.empty()) throw DomainError("flow front covers no site");
    return std::sqrt(static_cast<double>(front.covered.size()));
}

struct ClassicalSample {
    long step = 0;
    std::size_t covered = 0;  // N
    double width = 1.0;       // sqrt(N)
};

inline std::vector<ClassicalSample> classical_trace(const Lattice& lattice, std::span<const long> step_grid) {
    for (std::size_t k = 0; k < step_grid.size(); ++k) {
        if (step_grid[k] < 0) throw DomainError("propagation steps must be non-negative");
        if (k > 0 && step_grid[k] <= step_grid[k - 1]) throw DomainError("step grid must be increasing");
    }
    const auto dist = pipe_distances(lattice, lattice.injection());
    std::vector<long> sorted;
    for (long d : dist)
        if (d >= 0) sorted.push_back(d);
    std::sort(sorted.begin(), sorted.end());
    std::vector<ClassicalSample> out;
    out.reserve(step_grid.size());
    for (long t : step_grid) {
        const auto n = static_cast<std::size_t>(std::upper_bound(sorted.begin(), sorted.end(), t) - sorted.begin());
        out.push_back({t, n, std::sqrt(static_cast<double>(n))});
    }
    return out;
}

struct KneeOptions {
    double resolution = 0.01;  // knee search grid
    double minimum_drop = 0.05;  // IPR drop required for a descending branch
};

struct KneeReport {
    double knee = 0.0;            // where the quadratic meets the flat base
    double base = 0.0;            // flat level above the knee
    Eigen::Vector3d quadratic{};  // c0 + c1 P + c2 P^2 on the descending branch
    double last_descending = 0.0; // last grid point of the quadratic branch
    double first_flat = 0.0;      // first grid point of the flat branch
    double sse = 0.0;
};

namespace detail {

struct QuadraticFit {
    Eigen::Vector3d coeff;
    double sse;
};

inline QuadraticFit fit_quadratic(std::span<const double> x, std::span<const double> y) {
    Eigen::MatrixXd a(static_cast<Eigen::Index>(x.size()), 3);
    Eigen::VectorXd b(static_cast<Eigen::Index>(x.size()));
    for (std::size_t i = 0; i < x.size(); ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        a(r, 0) = 1.0;
        a(r, 1) = x[i];
        a(r, 2) = x[i] * x[i];
        b(r) = y[i];
    }
    Eigen::Vector3d c = a.colPivHouseholderQr().solve(b);
    return {c, (a * c - b).squaredNorm()};
}

inline double eval_quadratic(const Eigen::Vector3d& c, double x) { return c(0) + x * (c(1) + x * c(2)); }

} // namespace detail

/// Turning point of a mean-IPR-versus-P curve: a quadratic on the points
/// below the knee and a flat base on the points above, with the split chosen
/// by grid search (0.01 resolution, leftmost on ties) to minimise the joint
/// squared error. The knee is then the first grid position between the last
/// quadratic point and the first flat point where the quadratic reaches the
/// base, or the position of closest approach when it never does.
inline KneeReport find_ipr_knee(std::span<const double> p, std::span<const double> mean_ipr,
                                const KneeOptions& opt = {}) {
    if (p.size() != mean_ipr.size()) throw DomainError("knee: P grid and IPR curve differ in length");
    if (p.size() < 5) throw DomainError("knee: at least five grid points are required");
    for (std::size_t i = 1; i < p.size(); ++i)
        if (!(p[i] > p[i - 1])) throw DomainError("knee: P grid must be increasing");

    const auto steps = static_cast<long>(std::floor((p.back() - p.front()) / opt.resolution + 1e-9));
    bool found = false;
    KneeReport best;
    best.sse = std::numeric_limits<double>::infinity();
    std::size_t best_split = 0;
    for (long s = 1; s <= steps; ++s) {
        const double k = p.front() + static_cast<double>(s) * opt.resolution;
        const auto split = static_cast<std::size_t>(std::lower_bound(p.begin(), p.end(), k - 1e-12) - p.begin());
        if (split < 3 || split >= p.size()) continue;
        const auto quad = detail::fit_quadratic(p.first(split), mean_ipr.first(split));
        double base = 0.0;
        for (std::size_t i = split; i < p.size(); ++i) base += mean_ipr[i];
        base /= static_cast<double>(p.size() - split);
        double sse = quad.sse;
        for (std::size_t i = split; i < p.size(); ++i) sse += (mean_ipr[i] - base) * (mean_ipr[i] - base);
        if (sse < best.sse - 1e-15) {
            found = true;
            best.sse = sse;
            best.quadratic = quad.coeff;
            best.base = base;
            best_split = split;
        }
    }
    if (!found) throw DomainError("knee: no admissible split of the P grid");
    if (mean_ipr.front() - best.base < opt.minimum_drop)
        throw DomainError("knee: the curve has no descending branch on this P grid");

    best.last_descending = p[best_split - 1];
    best.first_flat = p[best_split];
    const auto n = static_cast<long>(std::floor((best.first_flat - best.last_descending) / opt.resolution + 1e-9));
    double closest = std::numeric_limits<double>::infinity();
    best.knee = best.first_flat;
    for (long s = 0; s <= n; ++s) {
        const double x = best.last_descending + static_cast<double>(s) * opt.resolution;
        const double gap = detail::eval_quadratic(best.quadratic, x) - best.base;
        if (gap <= 0.0) {
            best.knee = x;
            break;
        }
        if (gap < closest) {
            closest = gap;
            best.knee = x;
        }
    }
    best.knee = std::round(best.knee / opt.resolution) * opt.resolution;
    return best;
}

struct ClassicalIprPoint {
    double probability = 0.0;
    double mean_ipr = 0.0;
    double width = 0.0;  // <IPR>^(-1/2)
    std::size_t trials = 0;
};

/// Mean classical IPR after `steps` for each P over `trials` lattices, and
/// the knee of that curve. Trial k uses lattice seed trial_seed(master, k).
inline std::pair<std::vector<ClassicalIprPoint>, KneeReport>
classical_threshold_from_ipr(const LatticeSpec& spec, std::span<const double> p_grid, std::size_t trials, long steps,
                             std::uint64_t master_seed, const KneeOptions& opt = {}) {
    if (p_grid.size() < 5) throw DomainError("knee: at least five grid points are required");
    if (trials == 0) throw DomainError("at least one trial per point is required");
    std::vector<ClassicalIprPoint> curve;
    for (double p : p_grid) {
        double sum = 0.0;
        for (std::size_t k = 0; k < trials; ++k) {
            const auto lattice = generate_lattice(spec, p, trial_seed(master_seed, k));
            sum += classical_ipr(flow_front(lattice, steps));
        }
        const double mean = sum / static_cast<double>(trials);
        curve.push_back({p, mean, 1.0 / std::sqrt(mean), trials});
    }
    std::vector<double> y;
    for (const auto& c : curve) y.push_back(c.mean_ipr);
    return {curve, find_ipr_knee(p_grid, y, opt)};
}

} // namespace qperc
