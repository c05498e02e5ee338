#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dcc/controllers.hpp"
#include "dcc/facilities.hpp"
#include "dcc/kernels.hpp"
#include "dcc/medium.hpp"
#include "dcc/mobility.hpp"

namespace dcc {

struct TrafficConfig {
  bool cam = true;
  CamParams cam_params;
  BackgroundParams background;
  std::size_t queue_capacity = 2;
  bool operator==(const TrafficConfig&) const = default;
};

struct MetricsConfig {
  Roi roi = Roi::All;
  /// Senders whose transmissions are logged; <= 0 logs every vehicle.
  int sample_size = 50;
  double bin_width_m = 50.0;
  bool operator==(const MetricsConfig&) const = default;
};

struct OutputConfig {
  bool cbr_windows = false;  // per-vehicle, per-window CBR dump
  bool trace = false;        // mobility trace
  bool operator==(const OutputConfig&) const = default;
};

/// Fully resolved parameters of one run.
struct RunConfig {
  ScenarioSpec scenario;
  ControllerConfig controller = make_preset("etsi-adaptive");
  RadioParams radio;
  TrafficConfig traffic;
  MetricsConfig metrics;
  OutputConfig output;
  /// Total simulated time; metrics aggregate over [warmup, duration].
  Duration duration = std::chrono::seconds(180);
  Duration warmup = std::chrono::seconds(60);
  Duration mobility_tick = std::chrono::milliseconds(100);
  std::uint64_t seed = 1;
  std::string output_dir = "out";
  kernels::Policy policy = kernels::Policy::Serial;

  void validate() const;  // throws ConfigError naming the field
  Duration controller_period() const { return 2 * controller.params.t_cbr; }
  bool operator==(const RunConfig&) const = default;
};

/// Scenario-appropriate defaults (durations, warm-up, region of interest).
RunConfig default_config(ScenarioKind kind);

/// Ordered (key, value) pairs covering every field.
std::vector<std::pair<std::string, std::string>> serialize(const RunConfig& config);
std::string to_text(const RunConfig& config);

/// Parses `key = value` lines (`#` starts a comment). `scenario.kind` and
/// `controller.preset` are applied first, then the remaining keys in order,
/// then `overrides`.
RunConfig parse_config(std::string_view text,
                       const std::vector<std::pair<std::string, std::string>>& overrides = {});

/// Sets one dotted key; throws ConfigError for unknown keys or bad values.
void apply_setting(RunConfig& config, std::string_view key, std::string_view value);

/// Splits `key=value`.
std::pair<std::string, std::string> split_setting(std::string_view kv);

const std::vector<std::string>& config_keys();

}  // namespace dcc
