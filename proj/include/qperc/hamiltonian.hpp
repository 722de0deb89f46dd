#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "qperc/error.hpp"
#include "qperc/lattice.hpp"

namespace qperc {

/// Distance-dependent coupling between evanescently coupled waveguides:
/// coupling(d) = t1 * exp(-beta * (d - reference_distance)).
struct CouplingModel {
    double t1_per_mm = 0.3;
    double beta_per_um = 0.0;
    double reference_distance_um = 15.0;

    /// Model whose next-to-nearest coupling (at pitch * sqrt(3)) is
    /// `ratio * t1`.
    static CouplingModel from_ratio(double t1_per_mm, double ratio, double pitch_um) {
        if (!(ratio > 0.0 && ratio <= 1.0)) throw DomainError("next-to-nearest coupling ratio must lie in (0, 1]");
        return {t1_per_mm, -std::log(ratio) / (pitch_um * (std::sqrt(3.0) - 1.0)), pitch_um};
    }

    bool operator==(const CouplingModel&) const = default;
};

inline constexpr double kDefaultT1PerMm = 0.3;
inline constexpr double kDefaultNextNearestRatio = 0.15;

inline CouplingModel default_coupling(double pitch_um = 15.0) {
    return CouplingModel::from_ratio(kDefaultT1PerMm, kDefaultNextNearestRatio, pitch_um);
}

inline void validate(const CouplingModel& m) {
    if (!(m.t1_per_mm > 0.0) || !std::isfinite(m.t1_per_mm)) throw DomainError("t1 must be positive");
    if (!(m.beta_per_um >= 0.0) || !std::isfinite(m.beta_per_um)) throw DomainError("beta must be non-negative");
    if (!(m.reference_distance_um > 0.0)) throw DomainError("reference distance must be positive");
}

/// Coupling rate in mm^-1 at a waveguide separation in µm.
inline double coupling_strength(const CouplingModel& model, double distance_um) {
    if (!(distance_um > 0.0)) throw DomainError("coupling distance must be positive");
    if (distance_um == model.reference_distance_um) return model.t1_per_mm;
    return model.t1_per_mm * std::exp(-model.beta_per_um * (distance_um - model.reference_distance_um));
}

/// Real symmetric coupling matrix in CSR form over the occupied sites of a
/// lattice. Basis order is row-major over occupied sites. Column indices
/// within a row are sorted. Immutable after assembly.
class SparseHamiltonian {
public:
    std::size_t dimension() const noexcept { return site_order_.size(); }
    const std::vector<SiteIndex>& site_order() const noexcept { return site_order_; }
    const LatticeSpec& spec() const noexcept { return spec_; }

    /// Basis position of a lattice site, or -1 if the site is not in the basis.
    std::int64_t basis_index(SiteIndex s) const {
        if (!contains(spec_, s)) return -1;
        return basis_of_site_[flat_index(spec_, s)];
    }

    std::span<const std::size_t> row_offsets() const noexcept { return row_offsets_; }
    std::span<const std::uint32_t> column_indices() const noexcept { return columns_; }
    std::span<const double> values() const noexcept { return values_; }
    std::size_t nonzeros() const noexcept { return values_.size(); }

    /// Entry (i, j); zero when not stored.
    double at(std::size_t i, std::size_t j) const {
        for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k)
            if (columns_[k] == j) return values_[k];
        return 0.0;
    }

    /// y = H x
    void multiply(std::span<const std::complex<double>> x, std::span<std::complex<double>> y) const {
        const std::size_t n = dimension();
        for (std::size_t i = 0; i < n; ++i) {
            std::complex<double> acc{};
            for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) acc += values_[k] * x[columns_[k]];
            y[i] = acc;
        }
    }

    /// Largest absolute row sum. Bounds the spectral radius (Gershgorin).
    double gershgorin_bound() const noexcept {
        double bound = 0.0;
        for (std::size_t i = 0; i < dimension(); ++i) {
            double s = 0.0;
            for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) s += std::abs(values_[k]);
            bound = std::max(bound, s);
        }
        return bound;
    }

    /// Coordinate-list export: "i j value" per stored entry, preceded by the
    /// site table "# site <basis> <row> <col>".
    std::string to_coordinate_list() const {
        std::string out = fmt::format("# dimension {}\n# nonzeros {}\n", dimension(), nonzeros());
        for (std::size_t i = 0; i < dimension(); ++i)
            out += fmt::format("# site {} {} {}\n", i, site_order_[i].row, site_order_[i].col);
        for (std::size_t i = 0; i < dimension(); ++i)
            for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k)
                out += fmt::format("{} {} {:.17g}\n", i, columns_[k], values_[k]);
        return out;
    }

private:
    template <OccupancyGrid G>
    friend SparseHamiltonian build_hamiltonian(const G&, const CouplingModel&);

    LatticeSpec spec_;
    std::vector<SiteIndex> site_order_;
    std::vector<std::int64_t> basis_of_site_;
    std::vector<std::size_t> row_offsets_;
    std::vector<std::uint32_t> columns_;
    std::vector<double> values_;
};

/// Couples every occupied pair at nearest-neighbour distance with t1 and
/// every occupied pair at next-to-nearest distance with coupling(pitch*sqrt 3),
/// whether or not the site between them is occupied. No on-site term.
template <OccupancyGrid G>
SparseHamiltonian build_hamiltonian(const G& grid, const CouplingModel& model) {
    validate(model);
    const LatticeSpec& spec = grid.spec();
    SparseHamiltonian h;
    h.spec_ = spec;
    h.basis_of_site_.assign(spec.site_count(), -1);
    for (std::size_t i = 0; i < spec.site_count(); ++i) {
        const SiteIndex s = site_at(spec, i);
        if (grid.occupied(s)) {
            h.basis_of_site_[i] = static_cast<std::int64_t>(h.site_order_.size());
            h.site_order_.push_back(s);
        }
    }
    if (h.site_order_.empty()) throw DomainError("lattice has no occupied site");

    const double t_near = coupling_strength(model, spec.pitch_um);
    const double t_next = coupling_strength(model, spec.pitch_um * std::sqrt(3.0));

    h.row_offsets_.reserve(h.site_order_.size() + 1);
    h.row_offsets_.push_back(0);
    std::vector<std::pair<std::uint32_t, double>> row;
    for (const SiteIndex s : h.site_order_) {
        row.clear();
        for (const SiteIndex n : lattice_neighbors(spec, s, NeighborKind::nearest))
            if (grid.occupied(n)) row.emplace_back(static_cast<std::uint32_t>(h.basis_of_site_[flat_index(spec, n)]), t_near);
        if (t_next != 0.0)
            for (const SiteIndex n : lattice_neighbors(spec, s, NeighborKind::next_nearest))
                if (grid.occupied(n))
                    row.emplace_back(static_cast<std::uint32_t>(h.basis_of_site_[flat_index(spec, n)]), t_next);
        std::sort(row.begin(), row.end());
        for (const auto& [col, v] : row) {
            h.columns_.push_back(col);
            h.values_.push_back(v);
        }
        h.row_offsets_.push_back(h.columns_.size());
    }
    return h;
}

} // namespace qperc
