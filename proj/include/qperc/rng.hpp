#pragma once

// Counter-based random numbers. Every draw is a pure function of a 64-bit
// key and a 64-bit counter:
//
//   mix64(x)      = SplitMix64 finalizer
//   stream(k, n)  = mix64(mix64(k) + 0x9E3779B97F4A7C15 * (n + 1))
//   uniform(k, n) = (stream(k, n) >> 11) * 2^-53            in [0, 1)
//
// Site draws use the counter (row << 32) | col, so a site's uniform does not
// depend on the lattice size or on the occupation probability.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <ranges>
#include <vector>

#include "qperc/error.hpp"

namespace qperc {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x ^= x >> 30;
    x *= 0xBF58476D1CE4E5B9ULL;
    x ^= x >> 27;
    x *= 0x94D049BB133111EBULL;
    x ^= x >> 31;
    return x;
}

constexpr std::uint64_t stream_value(std::uint64_t key, std::uint64_t counter) noexcept {
    return mix64(mix64(key) + kGolden * (counter + 1));
}

constexpr double to_unit_interval(std::uint64_t bits) noexcept {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Uniform draw in [0, 1) owned by one lattice site.
constexpr double site_uniform(std::uint64_t seed, std::uint32_t row, std::uint32_t col) noexcept {
    const std::uint64_t counter = (static_cast<std::uint64_t>(row) << 32) | col;
    return to_unit_interval(stream_value(seed, counter));
}

/// Seed of the lattice used by trial `trial_index` of an ensemble.
///
/// The occupation probability does not enter, so trial k sees the same
/// per-site uniforms at every P of a sweep (monotone coupling).
constexpr std::uint64_t trial_seed(std::uint64_t master_seed, std::uint64_t trial_index) noexcept {
    return stream_value(master_seed ^ 0x7170657263ULL, trial_index);
}

struct AutocorrelationReport {
    std::map<std::size_t, double> coefficients;  // lag -> r_k
    double bound = 0.0;                          // 3 / sqrt(n)
    bool pass = false;
};

/// Sample autocorrelation of a bit sequence at lags 1..max_lag. Passes iff
/// every |r_k| < 3/sqrt(n). Accepts any sized range of bool-convertible
/// values (std::vector<bool> included).
template <std::ranges::input_range Bits>
AutocorrelationReport autocorrelation_check(const Bits& bits, std::size_t max_lag) {
    std::vector<double> x;
    for (auto&& b : bits) x.push_back(static_cast<bool>(b) ? 1.0 : 0.0);
    const std::size_t n = x.size();
    if (max_lag == 0)
        throw DomainError("autocorrelation_check: max_lag must be positive");
    if (n < 10 * max_lag)
        throw DomainError("autocorrelation_check: sequence shorter than 10 * max_lag");

    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(n);
    double variance = 0.0;
    for (double& v : x) {
        v -= mean;
        variance += v * v;
    }
    if (variance == 0.0)
        throw DomainError("autocorrelation_check: degenerate input (zero variance)");

    AutocorrelationReport report;
    report.bound = 3.0 / std::sqrt(static_cast<double>(n));
    report.pass = true;
    for (std::size_t lag = 1; lag <= max_lag; ++lag) {
        double acc = 0.0;
        for (std::size_t i = 0; i + lag < n; ++i) acc += x[i] * x[i + lag];
        const double r = acc / variance;
        report.coefficients[lag] = r;
        if (!(std::abs(r) < report.bound)) report.pass = false;
    }
    return report;
}

} // namespace qperc
