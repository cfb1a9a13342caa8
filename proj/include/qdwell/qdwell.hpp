#pragma once

// Umbrella header for the qdwell scattering time-delay library.

#include "qdwell/amplitudes.hpp"
#include "qdwell/analysis.hpp"
#include "qdwell/barrier1d.hpp"
#include "qdwell/common.hpp"
#include "qdwell/delays.hpp"
#include "qdwell/interp.hpp"
#include "qdwell/io.hpp"
#include "qdwell/kinematics.hpp"
#include "qdwell/numerics.hpp"
#include "qdwell/radial.hpp"
