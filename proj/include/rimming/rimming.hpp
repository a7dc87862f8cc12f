/**
 * @file rimming.hpp
 * @brief Umbrella header for the library (the CLI layer lives under rimming/cli/).
 */

#pragma once

#include "rimming/bounds.hpp"
#include "rimming/errors.hpp"
#include "rimming/evolve.hpp"
#include "rimming/grid.hpp"
#include "rimming/io.hpp"
#include "rimming/linalg.hpp"
#include "rimming/model.hpp"
#include "rimming/steady.hpp"
#include "rimming/trajectory.hpp"
