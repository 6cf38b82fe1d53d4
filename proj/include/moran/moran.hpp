#pragma once

#include "moran/bounds.hpp"
#include "moran/continuous.hpp"
#include "moran/distribution.hpp"
#include "moran/error.hpp"
#include "moran/estimator.hpp"
#include "moran/exact.hpp"
#include "moran/graph.hpp"
#include "moran/process.hpp"
#include "moran/random.hpp"
#include "moran/rational.hpp"
#include "moran/state.hpp"
#include "moran/types.hpp"
