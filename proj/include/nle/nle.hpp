#pragma once

#include "analysis.hpp"
#include "constants.hpp"
#include "error.hpp"
#include "grid.hpp"
#include "harness/config.hpp"
#include "harness/identity.hpp"
#include "harness/report.hpp"
#include "harness/run.hpp"
#include "harness/suites.hpp"
#include "io.hpp"
#include "kernel.hpp"
#include "norms.hpp"
#include "operator.hpp"
#include "process.hpp"
#include "solver.hpp"
#include "symbol.hpp"
