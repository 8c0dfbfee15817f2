#pragma once

#include "core.hpp"
#include "expoly.hpp"
#include "mode_field.hpp"
#include "mode_field_io.hpp"
#include "grid_field.hpp"
#include "grid_solver.hpp"
#include "norms.hpp"
#include "bp_construction.hpp"
#include "mild_solver.hpp"
#include "experiments.hpp"
