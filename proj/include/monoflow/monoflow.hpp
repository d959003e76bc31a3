#pragma once

#include "monoflow/cone.hpp"
#include "monoflow/error.hpp"
#include "monoflow/expr.hpp"
#include "monoflow/integrator.hpp"
#include "monoflow/limit_set.hpp"
#include "monoflow/monotonicity.hpp"
#include "monoflow/oscillation.hpp"
#include "monoflow/rng.hpp"
#include "monoflow/system.hpp"
#include "monoflow/witness.hpp"
