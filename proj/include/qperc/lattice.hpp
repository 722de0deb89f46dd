#pragma once

// Honeycomb lattice in the brick-wall convention.
//
// Site (r, c) sits on sublattice (r + c) mod 2. Each row is a zigzag chain:
// (r, c) is bonded to (r, c - 1) and (r, c + 1). The third bond is vertical:
// to (r + 1, c) when r + c is even, to (r - 1, c) when r + c is odd.
// With nearest-neighbour spacing a (the pitch) the embedding is
//
//   x = c * a * sqrt(3) / 2
//   y = r * a * 3 / 2 - (a / 2) * ((r + c) mod 2)
//
// so (0, 0) is the origin, every bond has length a and the six
// next-to-nearest neighbours (r, c +- 2), (r +- 1, c +- 1) lie at a * sqrt(3).

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "qperc/error.hpp"
#include "qperc/rng.hpp"
#include "qperc/union_find.hpp"

namespace qperc {

struct LatticeSpec {
    int rows = 40;
    int cols = 40;
    double pitch_um = 15.0;

    std::size_t site_count() const noexcept { return static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols); }

    bool operator==(const LatticeSpec&) const = default;
};

inline void validate(const LatticeSpec& spec) {
    if (spec.rows < 2 || spec.cols < 2)
        throw DomainError("lattice needs at least 2 rows and 2 columns");
    if (!(spec.pitch_um > 0.0) || !std::isfinite(spec.pitch_um))
        throw DomainError("lattice pitch must be positive");
}

struct SiteIndex {
    int row = 0;
    int col = 0;

    auto operator<=>(const SiteIndex&) const = default;
};

struct Position {
    double x = 0.0;  // µm
    double y = 0.0;  // µm
};

inline bool contains(const LatticeSpec& spec, SiteIndex s) noexcept {
    return s.row >= 0 && s.row < spec.rows && s.col >= 0 && s.col < spec.cols;
}

inline std::size_t flat_index(const LatticeSpec& spec, SiteIndex s) noexcept {
    return static_cast<std::size_t>(s.row) * static_cast<std::size_t>(spec.cols) + static_cast<std::size_t>(s.col);
}

inline SiteIndex site_at(const LatticeSpec& spec, std::size_t flat) noexcept {
    return {static_cast<int>(flat / static_cast<std::size_t>(spec.cols)),
            static_cast<int>(flat % static_cast<std::size_t>(spec.cols))};
}

inline Position site_coordinates(const LatticeSpec& spec, SiteIndex s) {
    if (!contains(spec, s))
        throw RangeError("site (" + std::to_string(s.row) + ", " + std::to_string(s.col) + ") outside lattice");
    const double a = spec.pitch_um;
    const bool odd = ((s.row + s.col) & 1) != 0;
    return {s.col * a * std::sqrt(3.0) / 2.0, s.row * a * 1.5 - (odd ? a / 2.0 : 0.0)};
}

enum class NeighborKind { nearest, next_nearest };

/// Geometric neighbours of a site, ignoring occupation. Order is fixed.
inline std::vector<SiteIndex> lattice_neighbors(const LatticeSpec& spec, SiteIndex s, NeighborKind kind) {
    std::vector<SiteIndex> out;
    auto push = [&](int r, int c) {
        if (contains(spec, {r, c})) out.push_back({r, c});
    };
    if (kind == NeighborKind::nearest) {
        const bool up = ((s.row + s.col) & 1) == 0;
        push(s.row + (up ? 1 : -1), s.col);
        push(s.row, s.col - 1);
        push(s.row, s.col + 1);
    } else {
        push(s.row - 1, s.col - 1);
        push(s.row - 1, s.col + 1);
        push(s.row, s.col - 2);
        push(s.row, s.col + 2);
        push(s.row + 1, s.col - 1);
        push(s.row + 1, s.col + 1);
    }
    return out;
}

/// Anything that answers "is this site occupied" over a LatticeSpec.
template <typename G>
concept OccupancyGrid = requires(const G& g, SiteIndex s) {
    { g.spec() } -> std::convertible_to<const LatticeSpec&>;
    { g.occupied(s) } -> std::convertible_to<bool>;
};

/// Plain occupation mask, used for explicit enumerations and text-grid input.
class SiteMask {
public:
    SiteMask(LatticeSpec spec, std::vector<std::uint8_t> bits) : spec_(spec), bits_(std::move(bits)) {
        if (bits_.size() != spec_.site_count())
            throw DomainError("mask size does not match lattice dimensions");
    }

    const LatticeSpec& spec() const noexcept { return spec_; }
    bool occupied(SiteIndex s) const noexcept { return contains(spec_, s) && bits_[flat_index(spec_, s)] != 0; }
    const std::vector<std::uint8_t>& bits() const noexcept { return bits_; }

private:
    LatticeSpec spec_;
    std::vector<std::uint8_t> bits_;
};

/// The site nearest to the centroid of all site positions. Ties go to the
/// first site in row-major order.
inline SiteIndex central_site(const LatticeSpec& spec) {
    double cx = 0.0, cy = 0.0;
    for (int r = 0; r < spec.rows; ++r)
        for (int c = 0; c < spec.cols; ++c) {
            const auto p = site_coordinates(spec, {r, c});
            cx += p.x;
            cy += p.y;
        }
    cx /= static_cast<double>(spec.site_count());
    cy /= static_cast<double>(spec.site_count());

    SiteIndex best{};
    double best_d = std::numeric_limits<double>::infinity();
    const double tie = 1e-9 * spec.pitch_um * spec.pitch_um;
    for (int r = 0; r < spec.rows; ++r)
        for (int c = 0; c < spec.cols; ++c) {
            const auto p = site_coordinates(spec, {r, c});
            const double d = (p.x - cx) * (p.x - cx) + (p.y - cy) * (p.y - cy);
            if (d < best_d - tie) {
                best_d = d;
                best = {r, c};
            }
        }
    return best;
}

/// Randomly occupied honeycomb lattice with a forced-occupied injection site.
/// Immutable once constructed.
class Lattice {
public:
    /// Lattice from an explicit mask. The injection defaults to the central
    /// site and must be occupied.
    static Lattice from_mask(const SiteMask& mask, std::optional<SiteIndex> injection = std::nullopt,
                             double occupation_probability = std::numeric_limits<double>::quiet_NaN(),
                             std::uint64_t seed = 0) {
        validate(mask.spec());
        const SiteIndex inj = injection.value_or(central_site(mask.spec()));
        if (!contains(mask.spec(), inj)) throw RangeError("injection site outside lattice");
        if (!mask.occupied(inj)) throw DomainError("injection site is vacant");
        return Lattice(mask.spec(), mask.bits(), occupation_probability, inj, seed);
    }

    const LatticeSpec& spec() const noexcept { return spec_; }
    bool occupied(SiteIndex s) const noexcept { return contains(spec_, s) && occupied_[flat_index(spec_, s)] != 0; }
    const std::vector<std::uint8_t>& occupation() const noexcept { return occupied_; }
    double occupation_probability() const noexcept { return probability_; }
    SiteIndex injection() const noexcept { return injection_; }
    std::uint64_t seed() const noexcept { return seed_; }
    const std::vector<Position>& coordinates() const noexcept { return coordinates_; }
    Position position(SiteIndex s) const { return site_coordinates(spec_, s); }

    std::size_t occupied_count() const noexcept {
        return static_cast<std::size_t>(std::count(occupied_.begin(), occupied_.end(), std::uint8_t{1}));
    }

    SiteMask mask() const { return SiteMask(spec_, occupied_); }

private:
    friend Lattice generate_lattice(const LatticeSpec&, double, std::uint64_t);

    Lattice(LatticeSpec spec, std::vector<std::uint8_t> occupied, double p, SiteIndex injection, std::uint64_t seed)
        : spec_(spec), occupied_(std::move(occupied)), probability_(p), injection_(injection), seed_(seed) {
        coordinates_.reserve(spec_.site_count());
        for (std::size_t i = 0; i < spec_.site_count(); ++i) coordinates_.push_back(site_coordinates(spec_, site_at(spec_, i)));
    }

    LatticeSpec spec_;
    std::vector<std::uint8_t> occupied_;
    double probability_;
    SiteIndex injection_;
    std::uint64_t seed_;
    std::vector<Position> coordinates_;
};

/// Site (r, c) is occupied iff site_uniform(seed, r, c) < P. The central
/// injection site is always occupied.
inline Lattice generate_lattice(const LatticeSpec& spec, double p, std::uint64_t seed) {
    validate(spec);
    if (!(p >= 0.0 && p <= 1.0))
        throw DomainError("occupation probability must lie in [0, 1]");
    const SiteIndex inj = central_site(spec);
    std::vector<std::uint8_t> occ(spec.site_count());
    for (int r = 0; r < spec.rows; ++r)
        for (int c = 0; c < spec.cols; ++c)
            occ[flat_index(spec, {r, c})] =
                site_uniform(seed, static_cast<std::uint32_t>(r), static_cast<std::uint32_t>(c)) < p ? 1 : 0;
    occ[flat_index(spec, inj)] = 1;
    return Lattice(spec, std::move(occ), p, inj, seed);
}

/// Occupied neighbours of an occupied site.
template <OccupancyGrid G>
std::vector<SiteIndex> neighbors(const G& grid, SiteIndex s, NeighborKind kind) {
    if (!contains(grid.spec(), s)) throw RangeError("neighbour query outside lattice");
    if (!grid.occupied(s)) throw DomainError("neighbour query on a vacant site");
    auto all = lattice_neighbors(grid.spec(), s, kind);
    std::erase_if(all, [&](SiteIndex n) { return !grid.occupied(n); });
    return all;
}

/// Cluster labels over nearest-neighbour connectivity. Labels are compact and
/// numbered in row-major order of each cluster's first site; vacant sites
/// carry kVacant.
struct ClusterLabeling {
    static constexpr std::int32_t kVacant = -1;

    LatticeSpec spec;
    std::vector<std::int32_t> label;
    std::vector<std::size_t> cluster_sizes;

    std::int32_t at(SiteIndex s) const { return label[flat_index(spec, s)]; }

    /// Label of the largest cluster (lowest label on ties); nullopt if empty.
    std::optional<std::int32_t> largest_cluster() const {
        if (cluster_sizes.empty()) return std::nullopt;
        return static_cast<std::int32_t>(std::max_element(cluster_sizes.begin(), cluster_sizes.end()) -
                                         cluster_sizes.begin());
    }
};

template <OccupancyGrid G>
ClusterLabeling label_clusters(const G& grid) {
    const LatticeSpec& spec = grid.spec();
    DisjointSet sets(spec.site_count());
    for (int r = 0; r < spec.rows; ++r)
        for (int c = 0; c < spec.cols; ++c) {
            if (!grid.occupied({r, c})) continue;
            const auto here = static_cast<std::uint32_t>(flat_index(spec, {r, c}));
            // Each bond is visited once: rightward and, from even sites, upward.
            if (c + 1 < spec.cols && grid.occupied({r, c + 1})) sets.unite(here, here + 1);
            if (((r + c) & 1) == 0 && r + 1 < spec.rows && grid.occupied({r + 1, c}))
                sets.unite(here, static_cast<std::uint32_t>(flat_index(spec, {r + 1, c})));
        }

    ClusterLabeling out{spec, std::vector<std::int32_t>(spec.site_count(), ClusterLabeling::kVacant), {}};
    std::vector<std::int32_t> root_label(spec.site_count(), ClusterLabeling::kVacant);
    for (std::size_t i = 0; i < spec.site_count(); ++i) {
        if (!grid.occupied(site_at(spec, i))) continue;
        const auto root = sets.find(static_cast<std::uint32_t>(i));
        if (root_label[root] == ClusterLabeling::kVacant) {
            root_label[root] = static_cast<std::int32_t>(out.cluster_sizes.size());
            out.cluster_sizes.push_back(0);
        }
        out.label[i] = root_label[root];
        ++out.cluster_sizes[static_cast<std::size_t>(root_label[root])];
    }
    return out;
}

enum class SpanningMode {
    corner_to_corner,  // touches first and last row and first and last column
    top_bottom,        // touches first and last row
    left_right,        // touches first and last column
};

/// Whether some cluster spans the lattice under the given mode.
inline bool spanning_check(const ClusterLabeling& labeling, SpanningMode mode = SpanningMode::corner_to_corner) {
    const LatticeSpec& spec = labeling.spec;
    const std::size_t n = labeling.cluster_sizes.size();
    if (n == 0) return false;
    enum : std::uint8_t { top = 1, bottom = 2, left = 4, right = 8 };
    std::vector<std::uint8_t> touches(n, 0);
    auto mark = [&](int r, int c, std::uint8_t bit) {
        const auto l = labeling.at({r, c});
        if (l != ClusterLabeling::kVacant) touches[static_cast<std::size_t>(l)] |= bit;
    };
    for (int c = 0; c < spec.cols; ++c) {
        mark(0, c, top);
        mark(spec.rows - 1, c, bottom);
    }
    for (int r = 0; r < spec.rows; ++r) {
        mark(r, 0, left);
        mark(r, spec.cols - 1, right);
    }
    std::uint8_t need = 0;
    switch (mode) {
    case SpanningMode::corner_to_corner: need = top | bottom | left | right; break;
    case SpanningMode::top_bottom: need = top | bottom; break;
    case SpanningMode::left_right: need = left | right; break;
    }
    return std::any_of(touches.begin(), touches.end(), [&](std::uint8_t t) { return (t & need) == need; });
}

template <OccupancyGrid G>
bool spanning_check(const ClusterLabeling& labeling, const G& grid,
                    SpanningMode mode = SpanningMode::corner_to_corner) {
    if (!(labeling.spec == grid.spec())) throw DomainError("labeling and lattice disagree on dimensions");
    return spanning_check(labeling, mode);
}

/// Spanning probability at occupation P by summing over every occupation
/// pattern. Feasible only for small lattices (at most 24 sites).
inline double exact_spanning_probability(const LatticeSpec& spec, double p,
                                         SpanningMode mode = SpanningMode::corner_to_corner) {
    validate(spec);
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("occupation probability must lie in [0, 1]");
    const std::size_t n = spec.site_count();
    if (n > 24) throw ResourceError("exact enumeration is limited to 24 sites");
    double total = 0.0;
    std::vector<std::uint8_t> bits(n);
    for (std::uint64_t m = 0; m < (std::uint64_t{1} << n); ++m) {
        int k = 0;
        for (std::size_t i = 0; i < n; ++i) {
            bits[i] = static_cast<std::uint8_t>((m >> i) & 1);
            k += bits[i];
        }
        const SiteMask mask(spec, bits);
        if (spanning_check(label_clusters(mask), mode))
            total += std::pow(p, k) * std::pow(1.0 - p, static_cast<int>(n) - k);
    }
    return total;
}

inline std::string to_string(SpanningMode mode) {
    switch (mode) {
    case SpanningMode::corner_to_corner: return "corner_to_corner";
    case SpanningMode::top_bottom: return "top_bottom";
    case SpanningMode::left_right: return "left_right";
    }
    return "corner_to_corner";
}

inline SpanningMode spanning_mode_from_string(const std::string& s) {
    if (s == "corner_to_corner") return SpanningMode::corner_to_corner;
    if (s == "top_bottom") return SpanningMode::top_bottom;
    if (s == "left_right") return SpanningMode::left_right;
    throw ValidationError("unknown spanning mode '" + s + "'");
}

} // namespace qperc
