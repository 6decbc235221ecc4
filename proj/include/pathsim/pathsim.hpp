#pragma once

// Umbrella header: virtual-pathway decomposition of pre- and post-selected
// systems, coarse-graining, strong/weak measurement statistics, Gaussian
// pointer dynamics, and Monte Carlo trial simulation.

#include "pathsim/errors.hpp"
#include "pathsim/hilbert.hpp"
#include "pathsim/measurement.hpp"
#include "pathsim/metersim.hpp"
#include "pathsim/montecarlo.hpp"
#include "pathsim/pathways.hpp"
#include "pathsim/scenario.hpp"

namespace pathsim {
inline constexpr const char* version = "1.0.0";
}
