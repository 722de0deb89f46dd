#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "qperc/propagator.hpp"

using namespace qperc;

namespace {

Lattice two_site_lattice() {
    return Lattice::from_mask(SiteMask(LatticeSpec{2, 2, 15.0}, {1, 1, 0, 0}), SiteIndex{0, 0});
}

} // namespace

TEST(Bessel, MatchesStandardLibrary) {
    for (double x : {0.0, 0.5, 3.0, 17.3, 120.0}) {
        const auto j = detail::bessel_j_sequence(x, 60);
        for (std::size_t n = 0; n <= 60; ++n)
            EXPECT_NEAR(j[n], std::cyl_bessel_j(static_cast<double>(n), x), 1e-13) << "x=" << x << " n=" << n;
    }
}

TEST(Bessel, LargeArgumentReference) {
    // 30-digit reference values; the standard library drifts by ~2e-13 here.
    const auto j = detail::bessel_j_sequence(900.0, 3);
    EXPECT_NEAR(j[0], 0.020013295249405231004, 5e-14);
    EXPECT_NEAR(j[1], 0.017527490876063071759, 5e-14);
    EXPECT_NEAR(j[2], -0.019974345269680646400, 5e-14);
    EXPECT_NEAR(j[3], -0.017616265743928319076, 5e-14);
}

TEST(Propagator, TwoSiteRabiOscillation) {
    const auto lat = two_site_lattice();
    const auto h = build_hamiltonian(lat, default_coupling());
    const auto psi0 = initial_state(h, {0, 0});
    const double t1 = default_coupling().t1_per_mm;
    for (int k = 1; k <= 100; ++k) {
        const double z = 0.37 * k;
        const auto psi = evolve(h, psi0, z);
        EXPECT_NEAR(psi.intensities()[1], std::pow(std::sin(t1 * z), 2), 1e-10);
        EXPECT_NEAR(std::norm(psi.amplitudes[1] - Complex(0.0, -std::sin(t1 * z))), 0.0, 1e-20);
    }
}

TEST(Propagator, AgreesWithDenseOracle) {
    for (int k = 0; k < 12; ++k) {
        const double p = std::array{0.5, 0.8, 1.0}[static_cast<std::size_t>(k % 3)];
        const auto lat = generate_lattice(LatticeSpec{10, 10, 15.0}, p, 900 + k);
        const auto h = build_hamiltonian(lat, default_coupling());
        const auto psi0 = initial_state(h, lat.injection());
        const DenseEvolver dense(h);
        for (double z : {0.3, 5.0, 20.0, 150.0}) EXPECT_LT(distance(evolve(h, psi0, z), dense.evolve(psi0, z)), 1e-10);
    }
}

TEST(Propagator, NormAndEnergyConserved) {
    const auto lat = generate_lattice(LatticeSpec{30, 30, 15.0}, 0.8, 4);
    const auto h = build_hamiltonian(lat, default_coupling());
    auto psi = initial_state(h, lat.injection());
    // start from a state with non-zero energy
    psi = evolve(h, psi, 1.0);
    const double e0 = energy(h, psi);
    for (int k = 0; k < 10; ++k) {
        psi = evolve(h, psi, 3.0);
        EXPECT_NEAR(psi.norm(), 1.0, 1e-10);
        EXPECT_NEAR(energy(h, psi), e0, 1e-10);
    }
}

TEST(Propagator, Semigroup) {
    const auto lat = generate_lattice(LatticeSpec{16, 16, 15.0}, 0.7, 31);
    const auto h = build_hamiltonian(lat, default_coupling());
    const auto psi0 = initial_state(h, lat.injection());
    EXPECT_LT(distance(evolve(h, evolve(h, psi0, 2.5), 4.0), evolve(h, psi0, 6.5)), 1e-11);
}

TEST(Propagator, ZeroDistanceIsIdentity) {
    const auto lat = generate_lattice(LatticeSpec{8, 8, 15.0}, 0.6, 2);
    const auto h = build_hamiltonian(lat, default_coupling());
    const auto psi0 = initial_state(h, lat.injection());
    EXPECT_EQ(evolve(h, psi0, 0.0).amplitudes, psi0.amplitudes);
}

TEST(Propagator, MirrorSymmetryOnFullLattice) {
    // 41 columns: reflecting c -> 40 - c preserves the sublattice pattern and
    // fixes column 20.
    const LatticeSpec spec{40, 41, 15.0};
    const auto lat = Lattice::from_mask(SiteMask(spec, std::vector<std::uint8_t>(spec.site_count(), 1)), SiteIndex{19, 20});
    const auto h = build_hamiltonian(lat, default_coupling());
    const auto inten = evolve(h, initial_state(h, lat.injection()), 20.0).intensities();
    double worst = 0.0;
    for (std::size_t i = 0; i < h.dimension(); ++i) {
        const auto s = h.site_order()[i];
        const auto j = static_cast<std::size_t>(h.basis_index({s.row, 40 - s.col}));
        worst = std::max(worst, std::abs(inten[i] - inten[j]));
    }
    EXPECT_LT(worst, 1e-12);
}

TEST(Propagator, LightCone) {
    // A term of order k in H reaches at most k nearest-neighbour hops away,
    // so amplitude d hops out is bounded by (R z)^d / d!.
    const auto lat = generate_lattice(LatticeSpec{30, 30, 15.0}, 1.0, 0);
    // steep decay leaves next-to-nearest couplings negligible
    const auto nn_only = build_hamiltonian(lat, CouplingModel{0.3, 50.0, 15.0});
    const double z = 1.0;
    const double rz = nn_only.gershgorin_bound() * z;
    const auto psi = evolve(nn_only, initial_state(nn_only, lat.injection()), z);
    const auto inj = lat.injection();
    for (std::size_t i = 0; i < nn_only.dimension(); ++i) {
        const auto s = nn_only.site_order()[i];
        // hop count is at least the Manhattan distance on the brick wall
        const int d = std::abs(s.row - inj.row) + std::abs(s.col - inj.col);
        if (d < 8) continue;
        const double bound = std::pow(rz, d) / std::tgamma(d + 1.0);
        EXPECT_LE(std::abs(psi.amplitudes[i]), bound + 1e-15);
    }
}

TEST(Propagator, TraceSamplesGrid) {
    const auto lat = generate_lattice(LatticeSpec{10, 10, 15.0}, 0.9, 6);
    const auto h = build_hamiltonian(lat, default_coupling());
    const auto psi0 = initial_state(h, lat.injection());
    const auto grid = uniform_z_grid(5.0, 0.5);
    ASSERT_EQ(grid.size(), 11u);
    const auto trace = evolve_trace(h, psi0, grid);
    ASSERT_EQ(trace.intensities.size(), grid.size());
    const auto direct = evolve(h, psi0, 5.0).intensities();
    for (std::size_t i = 0; i < direct.size(); ++i) EXPECT_NEAR(trace.intensities.back()[i], direct[i], 1e-11);
}

TEST(Propagator, InvalidArguments) {
    const auto lat = generate_lattice(LatticeSpec{6, 6, 15.0}, 0.9, 6);
    const auto h = build_hamiltonian(lat, default_coupling());
    const auto psi0 = initial_state(h, lat.injection());
    EXPECT_THROW(evolve(h, psi0, -1.0), DomainError);
    EXPECT_THROW(evolve(h, psi0, std::numeric_limits<double>::infinity()), DomainError);
    EXPECT_THROW(evolve(h, StateVector{}, 1.0), DomainError);
    const std::vector<double> bad{1.0, 1.0};
    EXPECT_THROW(evolve_trace(h, psi0, bad), DomainError);
    EXPECT_THROW(uniform_z_grid(5.0, 0.0), DomainError);
}

TEST(Propagator, DenseOracleRefusesLargeSystems) {
    const auto lat = generate_lattice(LatticeSpec{50, 50, 15.0}, 1.0, 0);
    const auto h = build_hamiltonian(lat, default_coupling());
    EXPECT_THROW(DenseEvolver{h}, ResourceError);
}

TEST(Propagator, InjectionMustBeOccupied) {
    const auto lat = two_site_lattice();
    const auto h = build_hamiltonian(lat, default_coupling());
    EXPECT_THROW(initial_state(h, {1, 1}), DomainError);
}
