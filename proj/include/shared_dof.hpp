#pragma once

// Umbrella header. The WebSocket transport (shared_dof/ws_server.hpp) is not
// included here because it pulls in Boost.Beast.

#include "shared_dof/error.hpp"
#include "shared_dof/geometry.hpp"
#include "shared_dof/scene.hpp"
#include "shared_dof/scenario_io.hpp"
#include "shared_dof/intent.hpp"
#include "shared_dof/control.hpp"
#include "shared_dof/sim_user.hpp"
#include "shared_dof/telemetry.hpp"
#include "shared_dof/runner.hpp"
#include "shared_dof/cues.hpp"
#include "shared_dof/protocol.hpp"
