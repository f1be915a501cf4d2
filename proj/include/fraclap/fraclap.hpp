#pragma once

#include "fraclap/constants.hpp"
#include "fraclap/errors.hpp"
#include "fraclap/experiments.hpp"
#include "fraclap/grid.hpp"
#include "fraclap/io.hpp"
#include "fraclap/kernel.hpp"
#include "fraclap/quadrature.hpp"
#include "fraclap/solver.hpp"
#include "fraclap/weight_families.hpp"
