#pragma once

#include "geolab/cones.hpp"
#include "geolab/convexity.hpp"
#include "geolab/errors.hpp"
#include "geolab/fields.hpp"
#include "geolab/geodesics.hpp"
#include "geolab/scenario.hpp"
#include "geolab/semispace.hpp"
#include "geolab/splitting.hpp"
