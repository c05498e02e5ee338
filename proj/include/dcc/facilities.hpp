#pragma once

#include <optional>

#include "dcc/gatekeeper.hpp"
#include "dcc/mobility.hpp"

namespace dcc {

/// CAM triggering rules.
struct CamParams {
  double position_threshold_m = 4.0;
  double speed_threshold = 0.5;       // m/s
  double heading_threshold_deg = 4.0;
  Duration min_interval = std::chrono::milliseconds(100);
  Duration max_interval = std::chrono::milliseconds(1000);
  std::uint32_t size_bytes = 400;
  Duration check_period = std::chrono::milliseconds(10);

  void validate() const;
  bool operator==(const CamParams&) const = default;
};

struct CamServiceState {
  VehicleDynamics last_cam_dynamics;
  SimTime last_cam_time{0};
  bool has_generated = false;
  /// Generation interval floor handed up by the gatekeeper.
  Duration t_gen_dcc{0};
};

/// Smallest absolute difference between two headings, in degrees.
double heading_difference(double a_deg, double b_deg);

/// Position, speed or heading moved past its threshold since the last CAM.
bool dynamics_trigger(const VehicleDynamics& now, const VehicleDynamics& last,
                      const CamParams& params);

/// Whether a CAM is due at `now`. The first check of a vehicle always fires.
bool cam_check(SimTime now, const VehicleDynamics& dynamics, const CamServiceState& state,
               const CamParams& params);

/// Builds the DP2 frame and records the generation in `state`.
Frame cam_build(SimTime now, VehicleId source, const VehicleDynamics& dynamics,
                CamServiceState& state, const CamParams& params, std::uint64_t frame_id);

struct BackgroundParams {
  bool enabled = false;
  std::uint32_t size_bytes = 400;
  bool operator==(const BackgroundParams&) const = default;
};

/// A DP3 frame to enqueue when the background source is on and the vehicle's
/// DP3 queue is empty; nullopt otherwise.
std::optional<Frame> background_poll(const Gatekeeper& gate, VehicleId source, SimTime now,
                                     const BackgroundParams& params, std::uint64_t frame_id);

}  // namespace dcc
