#pragma once

// Time evolution psi(z) = exp(-i H z) psi(0), with the propagation distance z
// (mm) playing the role of time.
//
// The production route expands exp(-i H z) in Chebyshev polynomials of the
// rescaled operator H / R, R = Gershgorin bound of H:
//
//   exp(-i H z) = J_0(Rz) + 2 sum_{k>=1} (-i)^k J_k(Rz) T_k(H / R)
//
// and stops once the Bessel weights fall below the term tolerance. Because
// ||T_k(H/R) psi|| <= ||psi||, the weight bounds the norm of each term.
// The dense eigendecomposition route is kept as a reference.

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "qperc/error.hpp"
#include "qperc/hamiltonian.hpp"

namespace qperc {

using Complex = std::complex<double>;

/// Amplitudes over the basis of a SparseHamiltonian (its site_order).
struct StateVector {
    std::vector<Complex> amplitudes;

    std::size_t size() const noexcept { return amplitudes.size(); }

    double norm() const noexcept {
        double s = 0.0;
        for (const auto& a : amplitudes) s += std::norm(a);
        return std::sqrt(s);
    }

    std::vector<double> intensities() const {
        std::vector<double> out(amplitudes.size());
        for (std::size_t i = 0; i < amplitudes.size(); ++i) out[i] = std::norm(amplitudes[i]);
        return out;
    }
};

struct EvolutionTrace {
    std::vector<double> z_samples;                 // mm
    std::vector<std::vector<double>> intensities;  // |psi_i|^2 per sample
};

struct PropagatorOptions {
    double term_tolerance = 1e-12;
    std::size_t max_order = 200000;
};

inline constexpr std::size_t kDenseDimensionLimit = 2000;

/// Photon injected into a single waveguide.
inline StateVector initial_state(const SparseHamiltonian& h, SiteIndex injection) {
    const auto idx = h.basis_index(injection);
    if (idx < 0) throw DomainError("injection site is not part of the Hamiltonian basis");
    StateVector s;
    s.amplitudes.assign(h.dimension(), Complex{});
    s.amplitudes[static_cast<std::size_t>(idx)] = 1.0;
    return s;
}

namespace detail {

/// J_0(x) .. J_n(x) for x >= 0 by Miller's backward recurrence, normalised
/// with J_0 + 2 sum J_{2k} = 1.
inline std::vector<double> bessel_j_sequence(double x, std::size_t n) {
    std::vector<double> j(n + 1, 0.0);
    if (x == 0.0) {
        j[0] = 1.0;
        return j;
    }
    const auto start_order = static_cast<std::size_t>(
        std::ceil(std::max(static_cast<double>(n), x) + 30.0 + 6.0 * std::cbrt(std::max(static_cast<double>(n), x))));
    std::size_t m = start_order + (start_order & 1);  // even start keeps the normalisation sum aligned
    double next = 0.0, cur = 1e-300, norm = 0.0;
    for (std::size_t k = m; k-- > 0;) {
        // cur holds J_{k+1}, next holds J_{k+2}
        const double prev = 2.0 * static_cast<double>(k + 1) / x * cur - next;
        next = cur;
        cur = prev;  // J_k
        if (k <= n) j[k] = cur;
        if (k % 2 == 0) norm += (k == 0 ? 1.0 : 2.0) * cur;
        if (std::abs(cur) > 1e250) {
            next *= 1e-250;
            cur *= 1e-250;
            norm *= 1e-250;
            for (std::size_t i = k; i <= n && i < j.size(); ++i) j[i] *= 1e-250;
        }
    }
    for (auto& v : j) v /= norm;
    return j;
}

/// Chebyshev weights a_k (without the (-i)^k phase) for exp(-i H z):
/// a_0 = J_0(Rz), a_k = 2 J_k(Rz); truncated at the first k > Rz where
/// |a_k| drops below the tolerance.
inline std::vector<double> chebyshev_weights(double scaled_time, const PropagatorOptions& opt) {
    const double x = std::abs(scaled_time);
    std::size_t n = static_cast<std::size_t>(std::ceil(1.2 * x)) + 64;
    for (;;) {
        if (n > opt.max_order)
            throw PropagationError("Chebyshev expansion did not converge within the maximum order");
        auto j = bessel_j_sequence(x, n);
        for (std::size_t k = 0; k <= n; ++k) {
            const double a = (k == 0 ? 1.0 : 2.0) * j[k];
            if (static_cast<double>(k) > x && std::abs(a) < opt.term_tolerance) {
                std::vector<double> w(k);
                for (std::size_t i = 0; i < k; ++i) w[i] = (i == 0 ? 1.0 : 2.0) * j[i];
                if (scaled_time < 0)
                    for (std::size_t i = 1; i < k; i += 2) w[i] = -w[i];
                return w;
            }
        }
        n *= 2;
    }
}

} // namespace detail

/// exp(-i H z) applied to `state` by Chebyshev expansion.
inline StateVector evolve(const SparseHamiltonian& h, const StateVector& state, double z,
                          const PropagatorOptions& opt = {}) {
    if (!std::isfinite(z)) throw DomainError("propagation distance must be finite");
    if (z < 0.0) throw DomainError("propagation distance must be non-negative");
    if (state.size() != h.dimension()) throw DomainError("state dimension does not match the Hamiltonian");
    if (z == 0.0) return state;

    const double radius = h.gershgorin_bound();
    if (radius == 0.0) return state;

    const auto weights = detail::chebyshev_weights(radius * z, opt);
    const std::size_t n = h.dimension();
    const double inv = 1.0 / radius;

    // phase (-i)^k cycles 1, -i, -1, i
    static constexpr Complex phases[4] = {{1, 0}, {0, -1}, {-1, 0}, {0, 1}};

    std::vector<Complex> prev = state.amplitudes;  // T_{k-1} psi
    std::vector<Complex> cur(n);                   // T_k psi
    std::vector<Complex> tmp(n);
    StateVector out;
    out.amplitudes.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.amplitudes[i] = weights[0] * prev[i];
    if (weights.size() == 1) return out;

    h.multiply(prev, cur);
    for (auto& v : cur) v *= inv;
    for (std::size_t i = 0; i < n; ++i) out.amplitudes[i] += weights[1] * phases[1] * cur[i];

    for (std::size_t k = 2; k < weights.size(); ++k) {
        h.multiply(cur, tmp);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = 2.0 * inv * tmp[i] - prev[i];
        std::swap(prev, cur);
        std::swap(cur, tmp);
        const Complex w = weights[k] * phases[k % 4];
        for (std::size_t i = 0; i < n; ++i) out.amplitudes[i] += w * cur[i];
    }
    return out;
}

/// Calls `visit(sample_index, z, state)` at each grid point, stepping from
/// one sample to the next.
inline void for_each_sample(const SparseHamiltonian& h, const StateVector& state, std::span<const double> z_grid,
                            const std::function<void(std::size_t, double, const StateVector&)>& visit,
                            const PropagatorOptions& opt = {}) {
    if (z_grid.empty()) throw DomainError("z grid is empty");
    if (!(z_grid.front() >= 0.0)) throw DomainError("z grid must start at z >= 0");
    for (std::size_t k = 1; k < z_grid.size(); ++k)
        if (!(z_grid[k] > z_grid[k - 1])) throw DomainError("z grid must be strictly increasing");

    StateVector psi = evolve(h, state, z_grid.front(), opt);
    visit(0, z_grid.front(), psi);
    for (std::size_t k = 1; k < z_grid.size(); ++k) {
        psi = evolve(h, psi, z_grid[k] - z_grid[k - 1], opt);
        visit(k, z_grid[k], psi);
    }
}

inline EvolutionTrace evolve_trace(const SparseHamiltonian& h, const StateVector& state,
                                   std::span<const double> z_grid, const PropagatorOptions& opt = {}) {
    EvolutionTrace trace;
    for_each_sample(
        h, state, z_grid,
        [&](std::size_t, double z, const StateVector& psi) {
            trace.z_samples.push_back(z);
            trace.intensities.push_back(psi.intensities());
        },
        opt);
    return trace;
}

/// Uniform grid 0, step, 2 step, ..., z_max (z_max included when it is a
/// multiple of step up to rounding).
inline std::vector<double> uniform_z_grid(double z_max, double step) {
    if (!(z_max >= 0.0) || !(step > 0.0)) throw DomainError("z grid needs z_max >= 0 and step > 0");
    const auto n = static_cast<std::size_t>(std::floor(z_max / step + 1e-9));
    std::vector<double> grid(n + 1);
    for (std::size_t k = 0; k <= n; ++k) grid[k] = static_cast<double>(k) * step;
    return grid;
}

/// exp(-i H z) by full eigendecomposition, cached for repeated distances.
class DenseEvolver {
public:
    explicit DenseEvolver(const SparseHamiltonian& h) {
        const std::size_t n = h.dimension();
        if (n > kDenseDimensionLimit) throw ResourceError("dense propagation limited to dimension 2000");
        Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
        const auto offsets = h.row_offsets();
        const auto cols = h.column_indices();
        const auto vals = h.values();
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = offsets[i]; k < offsets[i + 1]; ++k)
                dense(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(cols[k])) = vals[k];
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(dense);
        if (solver.info() != Eigen::Success) throw PropagationError("eigendecomposition failed");
        eigenvalues_ = solver.eigenvalues();
        eigenvectors_ = solver.eigenvectors();
    }

    StateVector evolve(const StateVector& state, double z) const {
        if (!std::isfinite(z)) throw DomainError("propagation distance must be finite");
        const auto n = eigenvalues_.size();
        if (static_cast<Eigen::Index>(state.size()) != n) throw DomainError("state dimension does not match");
        Eigen::VectorXcd psi(n);
        for (Eigen::Index i = 0; i < n; ++i) psi(i) = state.amplitudes[static_cast<std::size_t>(i)];
        Eigen::VectorXcd coeff = eigenvectors_.transpose().cast<Complex>() * psi;
        for (Eigen::Index i = 0; i < n; ++i) coeff(i) *= std::exp(Complex(0.0, -eigenvalues_(i) * z));
        Eigen::VectorXcd out = eigenvectors_.cast<Complex>() * coeff;
        StateVector result;
        result.amplitudes.assign(out.data(), out.data() + n);
        return result;
    }

    const Eigen::VectorXd& eigenvalues() const noexcept { return eigenvalues_; }

private:
    Eigen::VectorXd eigenvalues_;
    Eigen::MatrixXd eigenvectors_;
};

/// Reference propagation: psi(z) = V exp(-i Lambda z) V^T psi(0).
inline StateVector dense_oracle(const SparseHamiltonian& h, const StateVector& state, double z) {
    return DenseEvolver(h).evolve(state, z);
}

/// <psi|H|psi>
inline double energy(const SparseHamiltonian& h, const StateVector& state) {
    std::vector<Complex> hpsi(state.size());
    h.multiply(state.amplitudes, hpsi);
    Complex e{};
    for (std::size_t i = 0; i < state.size(); ++i) e += std::conj(state.amplitudes[i]) * hpsi[i];
    return e.real();
}

/// Vector 2-norm of the difference of two states.
inline double distance(const StateVector& a, const StateVector& b) {
    if (a.size() != b.size()) throw DomainError("state dimensions differ");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::norm(a.amplitudes[i] - b.amplitudes[i]);
    return std::sqrt(s);
}

} // namespace qperc
