#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "qperc/hamiltonian.hpp"

using namespace qperc;

namespace {

// Dense coupling matrix built from site positions only.
std::vector<std::vector<double>> geometric_matrix(const Lattice& lat, const CouplingModel& m) {
    const auto& spec = lat.spec();
    std::vector<std::size_t> occ;
    for (std::size_t i = 0; i < spec.site_count(); ++i)
        if (lat.occupation()[i]) occ.push_back(i);
    const double a = spec.pitch_um, b = spec.pitch_um * std::sqrt(3.0);
    const double t_next = m.t1_per_mm * std::exp(-m.beta_per_um * (b - m.reference_distance_um));
    std::vector<std::vector<double>> h(occ.size(), std::vector<double>(occ.size(), 0.0));
    for (std::size_t i = 0; i < occ.size(); ++i)
        for (std::size_t j = 0; j < occ.size(); ++j) {
            const auto p = lat.coordinates()[occ[i]];
            const auto q = lat.coordinates()[occ[j]];
            const double d = std::hypot(p.x - q.x, p.y - q.y);
            if (std::abs(d - a) < 1e-9) h[i][j] = m.t1_per_mm;
            if (std::abs(d - b) < 1e-9) h[i][j] = t_next;
        }
    return h;
}

} // namespace

TEST(Coupling, ReferenceDistanceAndRatio) {
    const auto m = default_coupling(15.0);
    EXPECT_EQ(coupling_strength(m, 15.0), kDefaultT1PerMm);
    EXPECT_NEAR(coupling_strength(m, 15.0 * std::sqrt(3.0)) / m.t1_per_mm, kDefaultNextNearestRatio, 1e-12);
    EXPECT_GT(coupling_strength(m, 10.0), m.t1_per_mm);
    EXPECT_THROW(coupling_strength(m, 0.0), DomainError);
    EXPECT_THROW(CouplingModel::from_ratio(0.3, 0.0, 15.0), DomainError);
    EXPECT_THROW(validate(CouplingModel{-1.0, 0.0, 15.0}), DomainError);
}

TEST(Hamiltonian, MatchesGeometricConstruction) {
    const auto m = default_coupling(15.0);
    for (int k = 0; k < 20; ++k) {
        const auto lat = generate_lattice(LatticeSpec{9, 7, 15.0}, 0.4 + 0.03 * k, 300 + k);
        const auto h = build_hamiltonian(lat, m);
        const auto ref = geometric_matrix(lat, m);
        ASSERT_EQ(h.dimension(), ref.size());
        for (std::size_t i = 0; i < ref.size(); ++i)
            for (std::size_t j = 0; j < ref.size(); ++j) EXPECT_NEAR(h.at(i, j), ref[i][j], 1e-15);
    }
}

TEST(Hamiltonian, SymmetricWithZeroDiagonal) {
    const auto lat = generate_lattice(LatticeSpec{20, 20, 15.0}, 0.7, 5);
    const auto h = build_hamiltonian(lat, default_coupling());
    for (std::size_t i = 0; i < h.dimension(); ++i) {
        EXPECT_EQ(h.at(i, i), 0.0);
        for (std::size_t k = h.row_offsets()[i]; k < h.row_offsets()[i + 1]; ++k)
            EXPECT_EQ(h.at(h.column_indices()[k], i), h.values()[k]);
    }
}

TEST(Hamiltonian, TunnelsAcrossVacancy) {
    // (0,0) and (0,2) are next-to-nearest neighbours with (0,1) vacant between them.
    const LatticeSpec spec{2, 3, 15.0};
    const auto lat = Lattice::from_mask(SiteMask(spec, {1, 0, 1, 0, 0, 0}), SiteIndex{0, 0});
    const auto m = default_coupling();
    const auto h = build_hamiltonian(lat, m);
    ASSERT_EQ(h.dimension(), 2u);
    EXPECT_NEAR(h.at(0, 1), kDefaultNextNearestRatio * m.t1_per_mm, 1e-15);
}

TEST(Hamiltonian, BasisIsRowMajorOverOccupiedSites) {
    const auto lat = generate_lattice(LatticeSpec{6, 6, 15.0}, 0.5, 12);
    const auto h = build_hamiltonian(lat, default_coupling());
    for (std::size_t i = 1; i < h.dimension(); ++i) EXPECT_LT(h.site_order()[i - 1], h.site_order()[i]);
    for (std::size_t i = 0; i < h.dimension(); ++i) EXPECT_EQ(h.basis_index(h.site_order()[i]), static_cast<std::int64_t>(i));
    EXPECT_EQ(h.dimension(), lat.occupied_count());
}

TEST(Hamiltonian, GershgorinBoundsSpectrum) {
    const auto lat = generate_lattice(LatticeSpec{10, 10, 15.0}, 1.0, 1);
    const auto h = build_hamiltonian(lat, default_coupling());
    double row_max = 0.0;
    for (std::size_t i = 0; i < h.dimension(); ++i) {
        double s = 0.0;
        for (std::size_t k = h.row_offsets()[i]; k < h.row_offsets()[i + 1]; ++k) s += std::abs(h.values()[k]);
        row_max = std::max(row_max, s);
    }
    EXPECT_NEAR(h.gershgorin_bound(), row_max, 1e-15);
    // bulk row: 3 * t1 + 6 * t2
    EXPECT_NEAR(row_max, 0.3 * (3 + 6 * 0.15), 1e-12);
}

TEST(Hamiltonian, CoordinateListExport) {
    const LatticeSpec spec{2, 2, 15.0};
    const auto lat = Lattice::from_mask(SiteMask(spec, {1, 1, 0, 0}), SiteIndex{0, 0});
    const auto text = build_hamiltonian(lat, default_coupling()).to_coordinate_list();
    std::istringstream in(text);
    std::string line;
    int entries = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream row(line);
        std::size_t i = 0, j = 0;
        double v = 0.0;
        row >> i >> j >> v;
        EXPECT_EQ(i + j, 1u);
        EXPECT_EQ(v, 0.3);
        ++entries;
    }
    EXPECT_EQ(entries, 2);
}

TEST(Hamiltonian, EmptyLatticeRejected) {
    const SiteMask mask(LatticeSpec{3, 3, 15.0}, std::vector<std::uint8_t>(9, 0));
    EXPECT_THROW(build_hamiltonian(mask, default_coupling()), DomainError);
}
