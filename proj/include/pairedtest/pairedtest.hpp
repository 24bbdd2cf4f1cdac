#pragma once

#include "pairedtest/baselines.hpp"
#include "pairedtest/bench.hpp"
#include "pairedtest/bench_config.hpp"
#include "pairedtest/error.hpp"
#include "pairedtest/mwsr.hpp"
#include "pairedtest/numkernels.hpp"
#include "pairedtest/stattypes.hpp"
#include "pairedtest/synthgen.hpp"
#include "pairedtest/wsr.hpp"
