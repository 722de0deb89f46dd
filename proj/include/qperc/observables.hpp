#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "qperc/error.hpp"
#include "qperc/lattice.hpp"

namespace qperc {

/// Inverse participation ratio sum I_i^2 / (sum I_i)^2 of an intensity
/// vector. Invariant under permutation and positive scaling.
inline double ipr(std::span<const double> intensity) {
    double s1 = 0.0, s2 = 0.0;
    for (double v : intensity) {
        if (v < 0.0 || !std::isfinite(v)) throw DomainError("intensities must be finite and non-negative");
        s1 += v;
        s2 += v * v;
    }
    if (s1 == 0.0) throw DomainError("ipr of an all-zero intensity vector");
    return s2 / (s1 * s1);
}

struct IprSample {
    double value = 1.0;
    double probability = 1.0;  // occupation probability P
    double z_mm = 0.0;
    std::uint64_t seed = 0;
};

/// omega_eff = <IPR>^(-1/2) over samples that share (P, z).
inline double effective_width(std::span<const IprSample> samples) {
    if (samples.empty()) throw DomainError("effective_width of an empty sample set");
    double sum = 0.0;
    for (const auto& s : samples) {
        if (s.probability != samples.front().probability || s.z_mm != samples.front().z_mm)
            throw DomainError("effective_width samples mix different (P, z)");
        sum += s.value;
    }
    return 1.0 / std::sqrt(sum / static_cast<double>(samples.size()));
}

/// omega_eff from bare IPR values.
inline double effective_width(std::span<const double> ipr_values) {
    if (ipr_values.empty()) throw DomainError("effective_width of an empty sample set");
    double sum = 0.0;
    for (double v : ipr_values) sum += v;
    return 1.0 / std::sqrt(sum / static_cast<double>(ipr_values.size()));
}

struct IprStatistics {
    double mean = 0.0;
    double std = 0.0;    // n - 1 denominator
    double ratio = 0.0;  // std / mean
};

inline IprStatistics ipr_statistics(std::span<const double> values) {
    if (values.size() < 2) throw DomainError("ipr_statistics needs at least two samples");
    const double n = static_cast<double>(values.size());
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= n;
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    IprStatistics st;
    st.mean = mean;
    st.std = std::sqrt(ss / (n - 1.0));
    st.ratio = mean != 0.0 ? st.std / mean : 0.0;
    return st;
}

inline IprStatistics ipr_statistics(std::span<const IprSample> samples) {
    std::vector<double> v;
    v.reserve(samples.size());
    for (const auto& s : samples) v.push_back(s.value);
    return ipr_statistics(v);
}

/// Square bound of `side` x `side` index positions around the injection:
/// rows [inj.row - side/2, inj.row + side/2), same for columns.
struct SquareBound {
    SiteIndex injection;
    int side = 16;

    bool inside(SiteIndex s) const noexcept {
        const int half = side / 2;
        return s.row >= injection.row - half && s.row < injection.row + half && s.col >= injection.col - half &&
               s.col < injection.col + half;
    }
};

inline SquareBound make_bound(const LatticeSpec& spec, SiteIndex injection, int side) {
    if (side <= 0 || side % 2 != 0) throw DomainError("bound side must be a positive even number of sites");
    const int half = side / 2;
    if (injection.row - half < 0 || injection.row + half > spec.rows || injection.col - half < 0 ||
        injection.col + half > spec.cols)
        throw DomainError("bound does not fit inside the lattice");
    return {injection, side};
}

/// Fraction of the total intensity that lies outside the square bound.
/// `intensity` is indexed like `sites` (normally a Hamiltonian site_order).
inline double bound_fraction(const LatticeSpec& spec, SiteIndex injection, std::span<const SiteIndex> sites,
                             std::span<const double> intensity, int bound_side) {
    if (sites.size() != intensity.size()) throw DomainError("intensity and site list differ in length");
    const SquareBound bound = make_bound(spec, injection, bound_side);
    double total = 0.0, outside = 0.0;
    for (std::size_t i = 0; i < sites.size(); ++i) {
        total += intensity[i];
        if (!bound.inside(sites[i])) outside += intensity[i];
    }
    if (!(total > 0.0)) throw DomainError("bound_fraction of zero total intensity");
    return outside / total;
}

/// Same, with `intensity` over the occupied sites of `lattice` in row-major
/// order (the Hamiltonian basis order).
inline double bound_fraction(const Lattice& lattice, std::span<const double> intensity, int bound_side) {
    std::vector<SiteIndex> sites;
    sites.reserve(intensity.size());
    for (std::size_t i = 0; i < lattice.spec().site_count(); ++i)
        if (lattice.occupation()[i]) sites.push_back(site_at(lattice.spec(), i));
    return bound_fraction(lattice.spec(), lattice.injection(), sites, intensity, bound_side);
}

inline constexpr double kDefaultPortionThreshold = 0.10;

/// Inclusive: a fraction equal to the threshold counts as percolated.
constexpr bool percolation_event(double fraction, double threshold = kDefaultPortionThreshold) noexcept {
    return fraction >= threshold;
}

struct ExponentFit {
    double nu = 0.0;
    double intercept = 0.0;  // natural log
    double z_min = 0.0;
    double z_max = 0.0;
    double residual = 0.0;   // RMS in log space
    std::size_t points = 0;
};

/// Least-squares slope of log(width) against log(z) over [window_min,
/// window_max]. Without a window the fit uses [z_max / 2, z_max].
inline ExponentFit fit_exponent(std::span<const double> z, std::span<const double> width,
                                std::optional<std::pair<double, double>> window = std::nullopt) {
    if (z.size() != width.size()) throw DomainError("fit_exponent: z and width differ in length");
    if (z.empty()) throw DomainError("fit_exponent: no data");
    double lo, hi;
    if (window) {
        lo = window->first;
        hi = window->second;
    } else {
        double zmax = z[0];
        for (double v : z) zmax = std::max(zmax, v);
        lo = zmax / 2.0;
        hi = zmax;
    }
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < z.size(); ++i) {
        if (z[i] < lo || z[i] > hi) continue;
        if (!(z[i] > 0.0) || !(width[i] > 0.0)) throw DomainError("fit_exponent: non-positive value inside the window");
        lx.push_back(std::log(z[i]));
        ly.push_back(std::log(width[i]));
    }
    if (lx.size() < 3) throw DomainError("fit_exponent: fewer than three points in the fit window");

    const double n = static_cast<double>(lx.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    if (sxx == 0.0) throw DomainError("fit_exponent: all points share one z");
    ExponentFit fit;
    fit.nu = sxy / sxx;
    fit.intercept = my - fit.nu * mx;
    double rss = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        const double e = ly[i] - (fit.intercept + fit.nu * lx[i]);
        rss += e * e;
    }
    fit.residual = std::sqrt(rss / n);
    fit.z_min = lo;
    fit.z_max = hi;
    fit.points = lx.size();
    return fit;
}

} // namespace qperc
