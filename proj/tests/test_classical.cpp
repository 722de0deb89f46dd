#include <gtest/gtest.h>

#include <cmath>
#include <queue>
#include <vector>

#include "qperc/classical.hpp"
#include "qperc/ensemble.hpp"

using namespace qperc;

namespace {

// Hop distances by BFS over positions at exactly one pitch apart.
std::vector<long> geometric_hops(const Lattice& lat) {
    const auto& spec = lat.spec();
    const auto& pos = lat.coordinates();
    const std::size_t n = spec.site_count();
    std::vector<long> d(n, -1);
    const auto src = flat_index(spec, lat.injection());
    d[src] = 0;
    std::queue<std::size_t> q;
    q.push(src);
    while (!q.empty()) {
        const auto u = q.front();
        q.pop();
        for (std::size_t v = 0; v < n; ++v) {
            if (d[v] >= 0 || !lat.occupation()[v]) continue;
            if (std::abs(std::hypot(pos[u].x - pos[v].x, pos[u].y - pos[v].y) - spec.pitch_um) < 1e-9) {
                d[v] = d[u] + 1;
                q.push(v);
            }
        }
    }
    return d;
}

} // namespace

TEST(Classical, DistancesMatchGeometricBfs) {
    for (int k = 0; k < 10; ++k) {
        const auto lat = generate_lattice(LatticeSpec{12, 12, 15.0}, 0.5 + 0.05 * k, 40 + k);
        EXPECT_EQ(pipe_distances(lat, lat.injection()), geometric_hops(lat));
    }
}

TEST(Classical, FrontWidthIsSqrtCount) {
    const auto lat = generate_lattice(LatticeSpec{20, 20, 15.0}, 0.8, 3);
    const auto hops = geometric_hops(lat);
    for (long t : {0L, 1L, 4L, 9L, 30L}) {
        const auto front = flow_front(lat, t);
        std::size_t n = 0;
        for (long h : hops) n += (h >= 0 && h <= t);
        ASSERT_EQ(front.size(), n);
        EXPECT_DOUBLE_EQ(classical_ipr(front), 1.0 / static_cast<double>(n));
        EXPECT_DOUBLE_EQ(classical_effective_width(front), std::sqrt(static_cast<double>(n)));
    }
    EXPECT_EQ(flow_front(lat, 0).size(), 1u);
    EXPECT_THROW(flow_front(lat, -1), DomainError);
}

TEST(Classical, TraceIsNonDecreasing) {
    const auto lat = generate_lattice(LatticeSpec{30, 30, 15.0}, 0.75, 8);
    std::vector<long> steps;
    for (long t = 0; t <= 40; ++t) steps.push_back(t);
    const auto trace = classical_trace(lat, steps);
    for (std::size_t i = 1; i < trace.size(); ++i) EXPECT_GE(trace[i].covered, trace[i - 1].covered);
}

TEST(Knee, PlantedKneeRecovered) {
    // Quadratic touching a flat base at 0.63.
    std::vector<double> p, y;
    for (int i = 1; i <= 10; ++i) {
        const double x = 0.1 * i;
        p.push_back(x);
        y.push_back(x < 0.63 ? 0.01 + 2.0 * (0.63 - x) * (0.63 - x) : 0.01);
    }
    const auto r = find_ipr_knee(p, y);
    EXPECT_NEAR(r.knee, 0.63, 1e-9);
    EXPECT_NEAR(r.base, 0.01, 1e-12);
    EXPECT_NEAR(r.last_descending, 0.6, 1e-12);
    EXPECT_NEAR(r.first_flat, 0.7, 1e-12);
}

TEST(Knee, FlatCurveHasNoDescendingBranch) {
    std::vector<double> p, y;
    for (int i = 1; i <= 10; ++i) {
        p.push_back(0.1 * i);
        y.push_back(0.02 + 0.001 * (i % 2));
    }
    EXPECT_THROW(find_ipr_knee(p, y), DomainError);
}

TEST(Knee, TooFewPoints) {
    std::vector<double> p{0.1, 0.2, 0.3, 0.4}, y{1, 0.5, 0.1, 0.1};
    EXPECT_THROW(find_ipr_knee(p, y), DomainError);
}

TEST(Classical, RegimeSlopesOnLargeLattice) {
    // Unbounded growth on a full lattice, confinement well below threshold.
    ExperimentConfig cfg;
    cfg.spec = {100, 100, 15.0};
    cfg.steps_per_mm = 1.0;
    cfg.z_max_mm = 40.0;
    cfg.trials_per_p = 20;
    auto slope = [&](double p) {
        std::vector<ClassicalTrialResult> trials;
        for (std::size_t k = 0; k < cfg.trials_per_p; ++k) trials.push_back(run_classical_trial(cfg, p, k));
        const auto obs = classical_observables(cfg, trials);
        return fit_ensemble_exponent(obs, std::pair{20.0, 40.0}).nu;
    };
    EXPECT_NEAR(slope(1.0), 1.0, 0.05);
    EXPECT_LT(slope(0.5), 0.2);
}
