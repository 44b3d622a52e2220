#pragma once

// Umbrella header: the full simulation stack from linear algebra up to sweep
// emission and map rendering.

#include "qpa/linalg.hpp"
#include "qpa/metrics.hpp"
#include "qpa/montecarlo.hpp"
#include "qpa/protocol.hpp"
#include "qpa/quantum.hpp"
#include "qpa/render.hpp"
#include "qpa/states.hpp"
#include "qpa/sweep.hpp"
#include "qpa/version.hpp"
