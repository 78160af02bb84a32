#pragma once

// Everything except json_value.hpp, which needs the vendored JSON header.

#include "weldmill/api.hpp"
#include "weldmill/boundary.hpp"
#include "weldmill/engine.hpp"
#include "weldmill/error.hpp"
#include "weldmill/expr.hpp"
#include "weldmill/expr_utils.hpp"
#include "weldmill/linearity.hpp"
#include "weldmill/optimizer.hpp"
#include "weldmill/parser.hpp"
#include "weldmill/pipeline.hpp"
#include "weldmill/printer.hpp"
#include "weldmill/sugar.hpp"
#include "weldmill/typecheck.hpp"
#include "weldmill/types.hpp"
#include "weldmill/value.hpp"
