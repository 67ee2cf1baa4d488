#pragma once

#include "fracreg/core.hpp"
#include "fracreg/quadrature.hpp"
#include "fracreg/geometry.hpp"
#include "fracreg/grid.hpp"
#include "fracreg/morphology.hpp"
#include "fracreg/function.hpp"
#include "fracreg/operator.hpp"
#include "fracreg/solver.hpp"
#include "fracreg/barriers.hpp"
#include "fracreg/diagnostics.hpp"
