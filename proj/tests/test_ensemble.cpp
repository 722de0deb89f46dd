#include <gtest/gtest.h>

#include <cmath>

#include "qperc/ensemble.hpp"

using namespace qperc;

namespace {

ExperimentConfig small_config() {
    ExperimentConfig c;
    c.spec = {12, 12, 15.0};
    c.coupling = default_coupling(15.0);
    c.z_max_mm = 4.0;
    c.z_step_mm = 1.0;
    c.bound_side = 4;
    c.p_grid = {0.5, 0.7, 0.9};
    c.trials_per_p = 6;
    return c;
}

} // namespace

TEST(Estimate, WaldInterval) {
    const auto e = estimate_percolation_probability(25, 100);
    EXPECT_DOUBLE_EQ(e.pr, 0.25);
    EXPECT_NEAR(e.dpr, std::sqrt(0.25 * 0.75 / 100), 1e-15);
    EXPECT_EQ(estimate_percolation_probability(0, 10).dpr, 0.0);
    EXPECT_THROW(estimate_percolation_probability(1, 0), DomainError);
    EXPECT_THROW(estimate_percolation_probability(5, 4), DomainError);
}

TEST(Crossing, LinearInterpolation) {
    std::vector<double> p{0.5, 0.6, 0.7, 0.8};
    std::vector<double> pr{0.0, 0.2, 0.6, 1.0};
    EXPECT_NEAR(*find_crossing(p, pr, 0.5), 0.675, 1e-12);
    EXPECT_NEAR(*find_crossing(p, pr, 0.1), 0.55, 1e-12);
    EXPECT_FALSE(find_crossing(p, pr, 1.1).has_value());
}

TEST(Crossing, StepFunctionCrossesAtMidpoint) {
    // A jump from 0 to 1 between 0.7 and 0.8 interpolates to Pr(0.75) = 0.5.
    std::vector<CurvePoint> pts;
    for (double p : {0.6, 0.65, 0.7, 0.8, 0.85}) pts.push_back({p, estimate_percolation_probability(p > 0.75 ? 10 : 0, 10)});
    const auto c = make_transition_curve(pts);
    EXPECT_NEAR(*c.threshold, 0.75, 1e-12);
    EXPECT_NEAR(c.span->first, 0.71, 1e-12);
    EXPECT_NEAR(c.span->second, 0.79, 1e-12);
    EXPECT_NEAR(*c.span_width(), 0.08, 1e-12);
}

TEST(Crossing, FlatSegmentAtLevelResolvesLeft) {
    std::vector<double> p{0.5, 0.6, 0.7};
    std::vector<double> pr{0.5, 0.5, 1.0};
    EXPECT_DOUBLE_EQ(*find_crossing(p, pr, 0.5), 0.5);
}

TEST(ParallelFor, CoversEveryIndexOnce) {
    std::vector<int> hits(1000, 0);
    parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
    for (int h : hits) EXPECT_EQ(h, 1);
}

TEST(ParallelFor, RethrowsLowestFailure) {
    try {
        parallel_for(50, 3, [](std::size_t i) {
            if (i == 7 || i == 30) throw std::runtime_error(std::to_string(i));
        });
        FAIL();
    } catch (const std::runtime_error& e) {
        EXPECT_STREQ(e.what(), "7");
    }
}

TEST(Sweep, IndependentOfJobCount) {
    const auto cfg = small_config();
    const auto a = sweep(cfg, 1);
    const auto b = sweep(cfg, 3);
    EXPECT_EQ(a.trials, b.trials);
}

TEST(Sweep, TrialSeedsSharedAcrossProbabilities) {
    const auto cfg = small_config();
    const auto r = sweep(cfg, 1);
    for (std::size_t k = 0; k < cfg.trials_per_p; ++k) {
        EXPECT_EQ(r.trials[0][k].seed, r.trials[2][k].seed);
        EXPECT_EQ(r.trials[0][k].seed, trial_seed(cfg.master_seed, k));
    }
}

TEST(Sweep, TraceShapeAndInitialIpr) {
    const auto cfg = small_config();
    const auto t = run_quantum_trial(cfg, 0.8, 2);
    ASSERT_EQ(t.ipr_trace.size(), 5u);
    EXPECT_EQ(t.ipr_trace.front().first, 0.0);
    EXPECT_DOUBLE_EQ(t.ipr_trace.front().second, 1.0);
    EXPECT_EQ(t.percolated, percolation_event(t.final_bound_fraction, cfg.portion_threshold));
}

TEST(Sweep, NeedsTwoProbabilities) {
    auto cfg = small_config();
    cfg.p_grid = {0.5};
    EXPECT_THROW(sweep(cfg), DomainError);
    cfg.p_grid = {0.7, 0.5};
    EXPECT_THROW(sweep(cfg), DomainError);
}

TEST(Presets, ScaleWithSize) {
    const auto c = preset("paper-60");
    EXPECT_EQ(c.spec.rows, 60);
    EXPECT_EQ(c.z_max_mm, 30.0);
    EXPECT_EQ(c.bound_side, 24);
    EXPECT_EQ(c.p_grid.size(), 11u);
    EXPECT_EQ(preset("paper-80").bound_side, 32);
    EXPECT_THROW(preset("paper-50"), ValidationError);
}

TEST(Observables, EnsembleStatistics) {
    const auto cfg = small_config();
    const auto r = sweep(cfg, 1);
    const auto obs = ensemble_observables(r.trials[1]);
    ASSERT_EQ(obs.size(), 5u);
    std::vector<double> last;
    for (const auto& t : r.trials[1]) last.push_back(t.ipr_trace.back().second);
    const auto st = ipr_statistics(std::span<const double>(last));
    EXPECT_DOUBLE_EQ(obs.back().mean_ipr, st.mean);
    EXPECT_DOUBLE_EQ(obs.back().width, 1.0 / std::sqrt(st.mean));
}

TEST(ClassicalSweep, SpanningCurveIsMonotone) {
    // With shared per-site uniforms, occupation only grows with P, so a
    // spanning trial keeps spanning at every larger P.
    ExperimentConfig cfg = small_config();
    cfg.spec = {20, 20, 15.0};
    cfg.bound_side = 8;
    cfg.p_grid = probability_grid(0.5, 0.9, 0.05);
    cfg.trials_per_p = 50;
    const auto r = run_classical_sweep(cfg, 2);
    for (std::size_t ip = 1; ip < cfg.p_grid.size(); ++ip) {
        for (std::size_t k = 0; k < cfg.trials_per_p; ++k)
            EXPECT_TRUE(!r.trials[ip - 1][k].spans || r.trials[ip][k].spans);
        EXPECT_GE(r.spanning_curve.points[ip].estimate.pr, r.spanning_curve.points[ip - 1].estimate.pr);
    }
}

TEST(ClassicalSweep, KneeErrorReportedOnNarrowGrid) {
    ExperimentConfig cfg = small_config();
    cfg.p_grid = {0.95, 0.96, 0.97, 0.98, 0.99, 1.0};
    const auto r = run_classical_sweep(cfg, 1);
    EXPECT_FALSE(r.knee.has_value());
    EXPECT_FALSE(r.knee_error.empty());
}
