#pragma once

#include "capacity.hpp"
#include "cg.hpp"
#include "errors.hpp"
#include "expression.hpp"
#include "families.hpp"
#include "grid_solver.hpp"
#include "homogenization.hpp"
#include "mask.hpp"
#include "parallel.hpp"
#include "point_process.hpp"
#include "random_geometry.hpp"
#include "report.hpp"
#include "rng.hpp"
#include "stats.hpp"
#include "stencil.hpp"
