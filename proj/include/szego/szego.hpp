#pragma once

// Umbrella header.

#include "szego/exact.hpp"
#include "szego/graph_core.hpp"
#include "szego/quadrature.hpp"
#include "szego/kernels.hpp"
#include "szego/symbols.hpp"
#include "szego/fejer.hpp"
#include "szego/wick.hpp"
#include "szego/special.hpp"
#include "szego/processes.hpp"
#include "szego/estimation.hpp"
#include "szego/io.hpp"
