#pragma once

// fdep — dependence coefficient and independence test for functional data,
// with nearest-neighbor degree diagnostics and a simulation engine.

#include "fdep/baselines.hpp"
#include "fdep/core.hpp"
#include "fdep/dependence.hpp"
#include "fdep/errors.hpp"
#include "fdep/io.hpp"
#include "fdep/nn_graph.hpp"
#include "fdep/normal.hpp"
#include "fdep/parallel.hpp"
#include "fdep/rng.hpp"
#include "fdep/simulation.hpp"
#include "fdep/stats.hpp"
#include "fdep/studies.hpp"
