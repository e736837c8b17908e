#pragma once

#include "spongedim/error.hpp"
#include "spongedim/matrix.hpp"
#include "spongedim/lattice.hpp"
#include "spongedim/symbolic.hpp"
#include "spongedim/parallel.hpp"
#include "spongedim/measures.hpp"
#include "spongedim/quadrature.hpp"
#include "spongedim/dimensions.hpp"
#include "spongedim/cubes.hpp"
