#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dcc/engine.hpp"

namespace dcc {

/// Gain and bound parameters shared by the linear controllers.
struct ControllerParams {
  double alpha = 0.016;
  double beta = 0.0012;
  double cbr_target = 0.68;
  double delta_max = 0.03;
  double delta_min = 0.0006;
  double g_plus_max = 0.0005;
  double g_minus_max = -0.00025;
  /// Offset bound X of the bounded LIMERIC update; unset disables that variant.
  std::optional<double> x_bound;
  double alpha_high = 0.1;
  double th = 0.00001;
  Duration t_cbr = std::chrono::milliseconds(100);
  /// Starting allowance for every vehicle.
  double delta_initial = 0.03;

  void validate() const;  // throws ConfigError
  bool operator==(const ControllerParams&) const = default;
};

/// Reactive state machine table: level 0 is Relaxed, the last level is
/// Restrictive, levels in between are the Active sub-states.
struct ReactiveTable {
  /// lower_bounds[i] is the CBR at which level i starts; lower_bounds[0] == 0.
  std::vector<double> lower_bounds{0.0, 0.30, 0.39, 0.48, 0.57, 0.66, 0.75};
  /// Message rate cap (msg/s) per level.
  std::vector<double> rates{20, 10, 8, 6, 4, 2, 1};

  void validate() const;
  int level_for(double cbr) const;
  int restrictive_level() const { return static_cast<int>(rates.size()) - 1; }
  bool operator==(const ReactiveTable&) const = default;
};

struct ControllerState {
  double delta = 0.03;
  double cbr_vehicle = 0.0;  // smoothed CBR used by the ETSI family
  double cbr_prev = 0.0;     // last raw CBR consumed by LIMERIC
  int fsm_level = 0;         // Reactive only
  SimTime last_update{0};
};

/// The two most recent CBR windows.
struct CbrSample {
  double cbr_l = 0.0;
  double cbr_lprev = 0.0;
  SimTime window_end{0};
};

// Single-step updates. Each mutates `state` and returns the new allowance
// (or, for the reactive machine, the new message-rate cap).

double limeric_update(ControllerState& state, const ControllerParams& params, double cbr);
double limeric_bounded_update(ControllerState& state, const ControllerParams& params,
                              double cbr);
double etsi_adaptive_update(ControllerState& state, const ControllerParams& params,
                            const CbrSample& sample);
double dual_alpha_update(ControllerState& state, const ControllerParams& params,
                         const CbrSample& sample);
double reactive_update(ControllerState& state, const ReactiveTable& table, double cbr);

/// Step 2 of the ETSI algorithm: the gain-limited offset for a smoothed CBR.
double etsi_offset(const ControllerParams& params, double cbr_vehicle);

/// Total steady-state utilization reached by K identical LIMERIC vehicles.
double steady_state_cbr(double k, const ControllerParams& params);

enum class Algorithm { Limeric, LimericBounded, EtsiAdaptive, DualAlpha, Reactive, EdcaOnly };

std::string_view to_string(Algorithm algo);

struct ControllerConfig {
  std::string preset = "etsi-adaptive";
  Algorithm algorithm = Algorithm::EtsiAdaptive;
  ControllerParams params;
  ReactiveTable reactive;

  bool gated() const { return algorithm != Algorithm::EdcaOnly; }
  bool operator==(const ControllerConfig&) const = default;
};

const std::vector<std::string>& preset_names();
/// Throws ConfigError listing the valid names for an unknown preset.
ControllerConfig make_preset(std::string_view name);

/// What the rate gate enforces for one vehicle.
struct GateLimit {
  enum class Mode { Share, RateCap, Unlimited };
  Mode mode = Mode::Unlimited;
  double value = 0.0;  // delta for Share, msg/s for RateCap

  static GateLimit share(double delta) { return {Mode::Share, delta}; }
  static GateLimit rate_cap(double rate) { return {Mode::RateCap, rate}; }
  static GateLimit unlimited() { return {}; }
};

/// Per-vehicle controller instance: buffers CBR windows and runs the
/// configured algorithm at every update tick.
class RateController {
 public:
  explicit RateController(const ControllerConfig& config);

  void on_cbr_window(double cbr, SimTime window_end);
  /// Runs one update; returns the new limit.
  GateLimit update(SimTime now);

  GateLimit limit() const;
  double delta() const { return state_.delta; }
  const ControllerState& state() const { return state_; }
  const CbrSample& last_sample() const { return sample_; }
  Algorithm algorithm() const { return config_->algorithm; }

 private:
  const ControllerConfig* config_;
  ControllerState state_;
  CbrSample sample_;
  bool have_window_ = false;
};

/// Closed-loop iteration without a radio: every vehicle sees cbr(n) = K * delta(n).
struct IdealLoopTrace {
  std::vector<double> delta;  // delta after each update
  std::vector<double> cbr;    // aggregate utilization fed into each update
};

IdealLoopTrace ideal_loop(const ControllerConfig& config, int k, int steps);

}  // namespace dcc
