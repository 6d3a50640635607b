#pragma once

#include "availability.hpp"
#include "case_models.hpp"
#include "compose.hpp"
#include "export.hpp"
#include "io.hpp"
#include "montecarlo.hpp"
#include "net.hpp"
#include "reachability.hpp"
#include "rng.hpp"
#include "sim.hpp"
#include "stats.hpp"
#include "trace.hpp"
