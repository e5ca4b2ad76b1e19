#pragma once

#include "ifstail/config.hpp"
#include "ifstail/entropy_tools.hpp"
#include "ifstail/error.hpp"
#include "ifstail/experiment.hpp"
#include "ifstail/generating_measure.hpp"
#include "ifstail/linalg.hpp"
#include "ifstail/metric_maps.hpp"
#include "ifstail/presets.hpp"
#include "ifstail/random.hpp"
#include "ifstail/stationary_sampler.hpp"
#include "ifstail/stats.hpp"
#include "ifstail/tail_analysis.hpp"
