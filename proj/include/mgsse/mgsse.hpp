#pragma once

#include "common.hpp"
#include "estimator.hpp"
#include "grid.hpp"
#include "kalman.hpp"
#include "plant.hpp"
#include "scenario.hpp"
#include "sparse.hpp"
#include "stacked.hpp"
