#pragma once

// Umbrella header: generalized Gibbs states over biorthogonal (Riesz) bases
// at finite truncation, with the full verification battery.

#include "bgs/biorthogonal.hpp"
#include "bgs/dynamics.hpp"
#include "bgs/errors.hpp"
#include "bgs/gibbs.hpp"
#include "bgs/hamiltonian.hpp"
#include "bgs/matrix.hpp"
#include "bgs/random.hpp"
#include "bgs/report.hpp"
