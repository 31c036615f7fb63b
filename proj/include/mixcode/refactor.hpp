#pragma once

// Umbrella header for the refactoring engine: the method catalogue, synonym
// table, traversal helpers, and the applicability/application entry points.

#include "mixcode/refactor/engine.hpp"
#include "mixcode/refactor/methods.hpp"
#include "mixcode/refactor/synonyms.hpp"
#include "mixcode/refactor/walk.hpp"
