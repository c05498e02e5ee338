#include "dcc/facilities.hpp"

#include <algorithm>
#include <cmath>

namespace dcc {

void CamParams::validate() const {
  if (!(position_threshold_m > 0)) throw ConfigError("cam.position_threshold", "must be positive");
  if (!(speed_threshold > 0)) throw ConfigError("cam.speed_threshold", "must be positive");
  if (!(heading_threshold_deg > 0)) throw ConfigError("cam.heading_threshold", "must be positive");
  if (min_interval <= Duration::zero() || max_interval < min_interval)
    throw ConfigError("cam.max_interval_ms", "need 0 < min_interval <= max_interval");
  if (size_bytes == 0) throw ConfigError("traffic.cam_bytes", "must be positive");
  if (check_period <= Duration::zero() || check_period > min_interval)
    throw ConfigError("cam.check_period_ms", "must be in (0, min_interval]");
}

double heading_difference(double a_deg, double b_deg) {
  const double d = std::fmod(std::abs(a_deg - b_deg), 360.0);
  return d > 180.0 ? 360.0 - d : d;
}

bool dynamics_trigger(const VehicleDynamics& now, const VehicleDynamics& last,
                      const CamParams& params) {
  const double moved = std::hypot(now.position.x - last.position.x, now.position.y - last.position.y);
  return moved >= params.position_threshold_m ||
         std::abs(now.speed - last.speed) >= params.speed_threshold ||
         heading_difference(now.heading, last.heading) >= params.heading_threshold_deg;
}

bool cam_check(SimTime now, const VehicleDynamics& dynamics, const CamServiceState& state,
               const CamParams& params) {
  if (!state.has_generated) return true;
  const Duration elapsed = now - state.last_cam_time;
  if (elapsed < std::max(params.min_interval, state.t_gen_dcc)) return false;
  return elapsed >= params.max_interval || dynamics_trigger(dynamics, state.last_cam_dynamics, params);
}

Frame cam_build(SimTime now, VehicleId source, const VehicleDynamics& dynamics,
                CamServiceState& state, const CamParams& params, std::uint64_t frame_id) {
  state.last_cam_dynamics = dynamics;
  state.last_cam_dynamics.timestamp = now;
  state.last_cam_time = now;
  state.has_generated = true;
  Frame f;
  f.id = frame_id;
  f.source = source;
  f.profile = DataProfile::DP2;
  f.payload_bytes = params.size_bytes;
  f.created_at = now;
  return f;
}

std::optional<Frame> background_poll(const Gatekeeper& gate, VehicleId source, SimTime now,
                                     const BackgroundParams& params, std::uint64_t frame_id) {
  if (!params.enabled || gate.depth(DataProfile::DP3) != 0) return std::nullopt;
  Frame f;
  f.id = frame_id;
  f.source = source;
  f.profile = DataProfile::DP3;
  f.payload_bytes = params.size_bytes;
  f.created_at = now;
  return f;
}

}  // namespace dcc
