#pragma once

#include "qgv/errors.hpp"
#include "qgv/indefinite_linalg.hpp"
#include "qgv/diffcalc.hpp"
#include "qgv/ads_hypersurface.hpp"
#include "qgv/quadric_geometry.hpp"
#include "qgv/lagrangian_gauss.hpp"
#include "qgv/example_catalog.hpp"
#include "qgv/expression.hpp"
#include "qgv/verify.hpp"
