#pragma once

#include "sparseoc/grid.hpp"
#include "sparseoc/elliptic.hpp"
#include "sparseoc/problem.hpp"
#include "sparseoc/penalty.hpp"
#include "sparseoc/l1_subproblem.hpp"
#include "sparseoc/dca.hpp"
#include "sparseoc/pd_baseline.hpp"
#include "sparseoc/harness.hpp"
