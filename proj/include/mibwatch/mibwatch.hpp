#pragma once

#include "mibwatch/change_detect.hpp"
#include "mibwatch/error.hpp"
#include "mibwatch/metrics.hpp"
#include "mibwatch/mib_model.hpp"
#include "mibwatch/nnarx.hpp"
#include "mibwatch/pipeline.hpp"
#include "mibwatch/traffic_sim.hpp"
