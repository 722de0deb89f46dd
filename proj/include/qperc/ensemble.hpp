#pragma once

// Monte Carlo driver. A sweep runs trials_per_p independent lattices at
// every occupation probability of the grid. Trial k at every P uses the
// lattice seed trial_seed(master_seed, k), so the per-site uniforms are
// shared across the grid and raising P only ever adds sites.
//
// Results are stored by (P index, trial index), which makes the output
// independent of the number of worker threads.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "qperc/classical.hpp"
#include "qperc/error.hpp"
#include "qperc/hamiltonian.hpp"
#include "qperc/lattice.hpp"
#include "qperc/observables.hpp"
#include "qperc/propagator.hpp"
#include "qperc/rng.hpp"

namespace qperc {

struct ExperimentConfig {
    LatticeSpec spec{};
    CouplingModel coupling = default_coupling();
    double z_max_mm = 20.0;
    double z_step_mm = 0.5;
    int bound_side = 16;
    double portion_threshold = kDefaultPortionThreshold;
    std::vector<double> p_grid;
    std::size_t trials_per_p = 100;
    std::uint64_t master_seed = 20210;
    double term_tolerance = 1e-12;
    // classical model
    double steps_per_mm = 2.0;
    SpanningMode spanning = SpanningMode::corner_to_corner;

    std::vector<double> z_grid() const { return uniform_z_grid(z_max_mm, z_step_mm); }
    long classical_steps() const { return std::lround(z_max_mm * steps_per_mm); }

    bool operator==(const ExperimentConfig&) const = default;
};

/// first, first + step, ..., last (inclusive), rounded to 1e-9.
inline std::vector<double> probability_grid(double first, double last, double step) {
    if (!(step > 0.0) || last < first) throw DomainError("probability grid needs step > 0 and last >= first");
    std::vector<double> grid;
    const auto n = static_cast<long>(std::floor((last - first) / step + 1e-9));
    for (long i = 0; i <= n; ++i) grid.push_back(std::round((first + static_cast<double>(i) * step) * 1e9) / 1e9);
    return grid;
}

inline void validate(const ExperimentConfig& c) {
    validate(c.spec);
    validate(c.coupling);
    if (!(c.z_max_mm >= 0.0) || !std::isfinite(c.z_max_mm)) throw DomainError("z_max must be non-negative");
    if (!(c.z_step_mm > 0.0)) throw DomainError("z_step must be positive");
    if (!(c.portion_threshold >= 0.0 && c.portion_threshold <= 1.0)) throw DomainError("portion threshold outside [0, 1]");
    if (c.trials_per_p < 1) throw DomainError("trials_per_p must be at least 1");
    if (c.p_grid.empty()) throw DomainError("P grid is empty");
    for (std::size_t i = 0; i < c.p_grid.size(); ++i) {
        if (!(c.p_grid[i] >= 0.0 && c.p_grid[i] <= 1.0)) throw DomainError("P grid values must lie in [0, 1]");
        if (i > 0 && !(c.p_grid[i] > c.p_grid[i - 1])) throw DomainError("P grid must be strictly increasing");
    }
    if (!(c.term_tolerance > 0.0)) throw DomainError("term tolerance must be positive");
    if (!(c.steps_per_mm > 0.0)) throw DomainError("steps_per_mm must be positive");
    make_bound(c.spec, central_site(c.spec), c.bound_side);
}

/// Lattice-size presets: (size, propagation length, bound side) =
/// (40, 20 mm, 16), (60, 30 mm, 24), (80, 40 mm, 32).
inline ExperimentConfig preset(const std::string& name) {
    ExperimentConfig c;
    int size = 0;
    if (name == "paper-40") size = 40;
    else if (name == "paper-60") size = 60;
    else if (name == "paper-80") size = 80;
    else throw ValidationError("unknown preset '" + name + "' (expected paper-40, paper-60 or paper-80)");
    c.spec = {size, size, 15.0};
    c.coupling = default_coupling(15.0);
    c.z_max_mm = size / 2.0;
    c.bound_side = size * 2 / 5;
    c.p_grid = probability_grid(0.5, 1.0, 0.05);
    return c;
}

struct TrialResult {
    double probability = 0.0;
    std::size_t trial_index = 0;
    std::uint64_t seed = 0;
    std::vector<std::pair<double, double>> ipr_trace;  // (z mm, IPR)
    double final_bound_fraction = 0.0;
    bool percolated = false;

    bool operator==(const TrialResult&) const = default;
};

/// generate_lattice -> build_hamiltonian -> evolve over the z grid -> IPR per
/// sample -> bound fraction at z_max -> percolation event.
inline TrialResult run_quantum_trial(const ExperimentConfig& config, double p, std::size_t trial_index) {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("occupation probability must lie in [0, 1]");
    TrialResult result;
    result.probability = p;
    result.trial_index = trial_index;
    result.seed = trial_seed(config.master_seed, trial_index);

    const Lattice lattice = generate_lattice(config.spec, p, result.seed);
    const SparseHamiltonian h = build_hamiltonian(lattice, config.coupling);
    const auto grid = config.z_grid();
    PropagatorOptions opt;
    opt.term_tolerance = config.term_tolerance;
    try {
        for_each_sample(
            h, initial_state(h, lattice.injection()), grid,
            [&](std::size_t k, double z, const StateVector& psi) {
                const auto intensity = psi.intensities();
                result.ipr_trace.emplace_back(z, ipr(intensity));
                if (k + 1 == grid.size())
                    result.final_bound_fraction = bound_fraction(config.spec, lattice.injection(), h.site_order(),
                                                                 intensity, config.bound_side);
            },
            opt);
    } catch (const PropagationError& e) {
        throw PropagationError(std::string(e.what()) + " (P = " + std::to_string(p) + ", trial " +
                                   std::to_string(trial_index) + ")",
                               p, static_cast<long>(trial_index));
    }
    result.percolated = percolation_event(result.final_bound_fraction, config.portion_threshold);
    return result;
}

struct ProbabilityEstimate {
    double pr = 0.0;
    double dpr = 0.0;
    std::size_t percolated = 0;  // n_P
    std::size_t trials = 0;      // N_P
};

/// Pr = n/N, dPr = sqrt(Pr (1 - Pr) / N).
inline ProbabilityEstimate estimate_percolation_probability(std::size_t percolated, std::size_t trials) {
    if (trials == 0) throw DomainError("no trials");
    if (percolated > trials) throw DomainError("more percolated trials than trials");
    ProbabilityEstimate e;
    e.percolated = percolated;
    e.trials = trials;
    e.pr = static_cast<double>(percolated) / static_cast<double>(trials);
    e.dpr = std::sqrt(e.pr * (1.0 - e.pr)) / std::sqrt(static_cast<double>(trials));
    return e;
}

inline ProbabilityEstimate estimate_percolation_probability(std::span<const TrialResult> results) {
    const auto n = static_cast<std::size_t>(
        std::count_if(results.begin(), results.end(), [](const TrialResult& r) { return r.percolated; }));
    return estimate_percolation_probability(n, results.size());
}

struct CurvePoint {
    double probability = 0.0;  // occupation probability P
    ProbabilityEstimate estimate;
};

struct TransitionCurve {
    std::vector<CurvePoint> points;
    std::optional<double> threshold;                 // Pr = 0.5 crossing
    std::optional<std::pair<double, double>> span;   // Pr = 0.1 and 0.9 crossings

    std::optional<double> span_width() const {
        if (!span) return std::nullopt;
        return span->second - span->first;
    }
};

/// First crossing of `level` along the (P, Pr) polyline, by linear
/// interpolation. Flat segments at the level resolve to their left end.
inline std::optional<double> find_crossing(std::span<const double> p, std::span<const double> pr, double level) {
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (pr[i] < level) continue;
        if (i == 0) return pr[0] == level ? std::optional<double>(p[0]) : std::nullopt;
        const double t = (level - pr[i - 1]) / (pr[i] - pr[i - 1]);
        return p[i - 1] + t * (p[i] - p[i - 1]);
    }
    return std::nullopt;
}

inline TransitionCurve make_transition_curve(std::vector<CurvePoint> points) {
    TransitionCurve curve;
    curve.points = std::move(points);
    std::vector<double> p, pr;
    for (const auto& pt : curve.points) {
        p.push_back(pt.probability);
        pr.push_back(pt.estimate.pr);
    }
    curve.threshold = find_crossing(p, pr, 0.5);
    const auto lo = find_crossing(p, pr, 0.1);
    const auto hi = find_crossing(p, pr, 0.9);
    if (lo && hi) curve.span = std::make_pair(*lo, *hi);
    return curve;
}

/// Runs task(i) for i in [0, n) on `jobs` threads. The first exception (by
/// index) is rethrown after all workers finish.
template <typename Task>
void parallel_for(std::size_t n, unsigned jobs, Task&& task) {
    jobs = std::max(1u, jobs);
    if (jobs == 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) task(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::mutex guard;
    std::size_t failed_index = n;
    std::exception_ptr failure;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                task(i);
            } catch (...) {
                std::lock_guard lock(guard);
                if (i < failed_index) {
                    failed_index = i;
                    failure = std::current_exception();
                }
            }
        }
    };
    std::vector<std::thread> pool;
    const auto count = std::min<std::size_t>(jobs, n);
    pool.reserve(count);
    for (std::size_t t = 0; t < count; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

inline unsigned default_jobs() { return std::max(1u, std::thread::hardware_concurrency()); }

struct SweepResult {
    ExperimentConfig config;
    std::vector<std::vector<TrialResult>> trials;  // [P index][trial index]
    TransitionCurve curve;
};

inline SweepResult sweep(const ExperimentConfig& config, unsigned jobs = 1) {
    validate(config);
    if (config.p_grid.size() < 2) throw DomainError("a sweep needs at least two P values");
    const std::size_t np = config.p_grid.size();
    const std::size_t nt = config.trials_per_p;
    SweepResult out;
    out.config = config;
    out.trials.assign(np, std::vector<TrialResult>(nt));
    parallel_for(np * nt, jobs, [&](std::size_t task) {
        const std::size_t ip = task / nt, it = task % nt;
        out.trials[ip][it] = run_quantum_trial(config, config.p_grid[ip], it);
    });
    std::vector<CurvePoint> points;
    for (std::size_t ip = 0; ip < np; ++ip)
        points.push_back({config.p_grid[ip], estimate_percolation_probability(out.trials[ip])});
    out.curve = make_transition_curve(std::move(points));
    return out;
}

struct ScalingEntry {
    int size = 0;
    std::optional<double> threshold;
    std::optional<double> span_width;
};

struct ScalingStudy {
    std::vector<SweepResult> sweeps;
    std::vector<ScalingEntry> report;
};

inline ScalingStudy scaling_study(const std::vector<ExperimentConfig>& configs, unsigned jobs = 1) {
    ScalingStudy study;
    for (const auto& c : configs) {
        study.sweeps.push_back(sweep(c, jobs));
        const auto& curve = study.sweeps.back().curve;
        study.report.push_back({c.spec.rows, curve.threshold, curve.span_width()});
    }
    return study;
}

/// Ensemble statistics of one P at one z.
struct ObservablePoint {
    double probability = 0.0;
    double z_mm = 0.0;
    double mean_ipr = 0.0;
    double std_ipr = 0.0;  // NaN for a single trial
    double width = 0.0;
    std::size_t trials = 0;
};

/// Per-z ensemble mean/std of IPR and omega_eff for the trials of one P.
inline std::vector<ObservablePoint> ensemble_observables(std::span<const TrialResult> trials) {
    std::vector<ObservablePoint> out;
    if (trials.empty()) return out;
    const std::size_t nz = trials.front().ipr_trace.size();
    for (std::size_t k = 0; k < nz; ++k) {
        std::vector<double> v;
        for (const auto& t : trials) v.push_back(t.ipr_trace[k].second);
        ObservablePoint pt;
        pt.probability = trials.front().probability;
        pt.z_mm = trials.front().ipr_trace[k].first;
        pt.trials = v.size();
        if (v.size() >= 2) {
            const auto st = ipr_statistics(v);
            pt.mean_ipr = st.mean;
            pt.std_ipr = st.std;
        } else {
            pt.mean_ipr = v.front();
            pt.std_ipr = std::numeric_limits<double>::quiet_NaN();
        }
        pt.width = 1.0 / std::sqrt(pt.mean_ipr);
        out.push_back(pt);
    }
    return out;
}

/// Transport exponent of an ensemble curve over [z_max/2, z_max] unless a
/// window is given.
inline ExponentFit fit_ensemble_exponent(std::span<const ObservablePoint> curve,
                                         std::optional<std::pair<double, double>> window = std::nullopt) {
    std::vector<double> z, w;
    for (const auto& pt : curve) {
        z.push_back(pt.z_mm);
        w.push_back(pt.width);
    }
    return fit_exponent(z, w, window);
}

// ---------------------------------------------------------------- classical

struct ClassicalTrialResult {
    double probability = 0.0;
    std::size_t trial_index = 0;
    std::uint64_t seed = 0;
    std::vector<std::size_t> covered;  // N at each classical step 0..t_max
    bool spans = false;

    double final_ipr() const { return 1.0 / static_cast<double>(covered.back()); }
    bool operator==(const ClassicalTrialResult&) const = default;
};

inline ClassicalTrialResult run_classical_trial(const ExperimentConfig& config, double p, std::size_t trial_index) {
    ClassicalTrialResult r;
    r.probability = p;
    r.trial_index = trial_index;
    r.seed = trial_seed(config.master_seed, trial_index);
    const Lattice lattice = generate_lattice(config.spec, p, r.seed);
    std::vector<long> steps(static_cast<std::size_t>(config.classical_steps()) + 1);
    for (std::size_t i = 0; i < steps.size(); ++i) steps[i] = static_cast<long>(i);
    for (const auto& s : classical_trace(lattice, steps)) r.covered.push_back(s.covered);
    r.spans = spanning_check(label_clusters(lattice), config.spanning);
    return r;
}

struct ClassicalSweepResult {
    ExperimentConfig config;
    std::vector<std::vector<ClassicalTrialResult>> trials;  // [P index][trial index]
    TransitionCurve spanning_curve;
    std::vector<ClassicalIprPoint> ipr_curve;  // at the final step
    std::optional<KneeReport> knee;
    std::string knee_error;  // why the knee is absent
};

inline ClassicalSweepResult run_classical_sweep(const ExperimentConfig& config, unsigned jobs = 1) {
    validate(config);
    if (config.p_grid.size() < 2) throw DomainError("a sweep needs at least two P values");
    const std::size_t np = config.p_grid.size();
    const std::size_t nt = config.trials_per_p;
    ClassicalSweepResult out;
    out.config = config;
    out.trials.assign(np, std::vector<ClassicalTrialResult>(nt));
    parallel_for(np * nt, jobs, [&](std::size_t task) {
        const std::size_t ip = task / nt, it = task % nt;
        out.trials[ip][it] = run_classical_trial(config, config.p_grid[ip], it);
    });
    std::vector<CurvePoint> points;
    std::vector<double> mean_ipr;
    for (std::size_t ip = 0; ip < np; ++ip) {
        const auto spans = static_cast<std::size_t>(std::count_if(
            out.trials[ip].begin(), out.trials[ip].end(), [](const ClassicalTrialResult& r) { return r.spans; }));
        points.push_back({config.p_grid[ip], estimate_percolation_probability(spans, nt)});
        double sum = 0.0;
        for (const auto& r : out.trials[ip]) sum += r.final_ipr();
        const double mean = sum / static_cast<double>(nt);
        mean_ipr.push_back(mean);
        out.ipr_curve.push_back({config.p_grid[ip], mean, 1.0 / std::sqrt(mean), nt});
    }
    out.spanning_curve = make_transition_curve(std::move(points));
    try {
        out.knee = find_ipr_knee(config.p_grid, mean_ipr);
    } catch (const DomainError& e) {
        out.knee_error = e.what();
    }
    return out;
}

/// Per-step ensemble observables of the classical model; z = step / steps_per_mm.
inline std::vector<ObservablePoint> classical_observables(const ExperimentConfig& config,
                                                          std::span<const ClassicalTrialResult> trials) {
    std::vector<ObservablePoint> out;
    if (trials.empty()) return out;
    for (std::size_t k = 0; k < trials.front().covered.size(); ++k) {
        std::vector<double> v;
        for (const auto& t : trials) v.push_back(1.0 / static_cast<double>(t.covered[k]));
        ObservablePoint pt;
        pt.probability = trials.front().probability;
        pt.z_mm = static_cast<double>(k) / config.steps_per_mm;
        pt.trials = v.size();
        if (v.size() >= 2) {
            const auto st = ipr_statistics(v);
            pt.mean_ipr = st.mean;
            pt.std_ipr = st.std;
        } else {
            pt.mean_ipr = v.front();
            pt.std_ipr = std::numeric_limits<double>::quiet_NaN();
        }
        pt.width = 1.0 / std::sqrt(pt.mean_ipr);
        out.push_back(pt);
    }
    return out;
}

} // namespace qperc
