// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "pgdham/assembly.hpp"
#include "pgdham/baselines.hpp"
#include "pgdham/core.hpp"
#include "pgdham/full_order.hpp"
#include "pgdham/io.hpp"
#include "pgdham/mesh.hpp"
#include "pgdham/pgd/solver.hpp"
#include "pgdham/ritz.hpp"
#include "pgdham/symplectic.hpp"
#include "pgdham/time_grid.hpp"
