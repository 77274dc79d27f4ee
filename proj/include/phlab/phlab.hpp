#pragma once

// Umbrella header for the boundary-layer good-unknown laboratory.

#include "config.hpp"
#include "dynamics.hpp"
#include "errors.hpp"
#include "experiments.hpp"
#include "grid.hpp"
#include "norms.hpp"
#include "operators.hpp"
#include "profiles.hpp"
#include "radius.hpp"
#include "records.hpp"
#include "spectral.hpp"
