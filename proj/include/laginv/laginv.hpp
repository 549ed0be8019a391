#pragma once

#include "laginv/diagnostics.hpp"
#include "laginv/error.hpp"
#include "laginv/expr.hpp"
#include "laginv/inversion.hpp"
#include "laginv/laguerre.hpp"
#include "laginv/monte_carlo.hpp"
#include "laginv/numeric.hpp"
#include "laginv/power_series.hpp"
#include "laginv/quadrature.hpp"
#include "laginv/rng.hpp"
#include "laginv/umvue.hpp"
