#pragma once

#include "actuator.hpp"
#include "bridge/drive.hpp"
#include "bridge/protocol.hpp"
#include "bridge/server.hpp"
#include "controller.hpp"
#include "error.hpp"
#include "flora.hpp"
#include "metrics.hpp"
#include "microclimate.hpp"
#include "random.hpp"
#include "scenario.hpp"
#include "scheduler.hpp"
#include "simulation.hpp"
#include "timelapse.hpp"
