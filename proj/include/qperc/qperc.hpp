#pragma once

#include "qperc/classical.hpp"
#include "qperc/config.hpp"
#include "qperc/ensemble.hpp"
#include "qperc/error.hpp"
#include "qperc/hamiltonian.hpp"
#include "qperc/io.hpp"
#include "qperc/lattice.hpp"
#include "qperc/lattice_io.hpp"
#include "qperc/observables.hpp"
#include "qperc/propagator.hpp"
#include "qperc/rng.hpp"
#include "qperc/union_find.hpp"

namespace qperc {
inline constexpr const char* kVersion = "1.0.0";
}
