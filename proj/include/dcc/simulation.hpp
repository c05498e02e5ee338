#pragma once

#include <array>
#include <memory>
#include <optional>
#include <vector>

#include "dcc/config.hpp"
#include "dcc/controllers.hpp"
#include "dcc/engine.hpp"
#include "dcc/facilities.hpp"
#include "dcc/gatekeeper.hpp"
#include "dcc/medium.hpp"
#include "dcc/metrics.hpp"
#include "dcc/mobility.hpp"

namespace dcc {

struct CbrWindowRow {
  VehicleId vehicle = 0;
  SimTime window_start{0};
  double cbr = 0.0;
};

struct TraceRow {
  VehicleId vehicle = 0;
  SimTime t{0};
  double x = 0.0;
  double y = 0.0;
  double speed = 0.0;
  double heading = 0.0;
};

struct FrameConservation {
  VehicleId vehicle = 0;
  FrameCounters counters;
  std::uint64_t in_flight = 0;  // queued at the gate or held by the MAC at the end
};

/// One complete run: builds the world from the config, schedules the periodic
/// activities and collects the logs.
class Simulation {
 public:
  explicit Simulation(const RunConfig& config);
  Simulation(const Simulation&) = delete;
  Simulation& operator=(const Simulation&) = delete;

  /// Runs to config.duration. May be called once.
  void run();

  const RunConfig& config() const { return config_; }
  const World& world() const { return world_; }
  const MetricsStore& metrics() const { return metrics_; }
  const Engine& engine() const { return engine_; }
  const Medium& medium() const { return *medium_; }
  /// Instant that series times are relative to (release, groups meeting, or 0).
  SimTime origin() const { return origin_; }
  const std::vector<CbrWindowRow>& cbr_windows() const { return cbr_rows_; }
  const std::vector<TraceRow>& trace() const { return trace_rows_; }
  std::vector<FrameConservation> conservation() const;
  double delta(VehicleId v) const { return vehicles_[v].controller.delta(); }

 private:
  struct Vehicle {
    explicit Vehicle(const ControllerConfig& cfg, std::size_t capacity)
        : gate(capacity), controller(cfg) {}
    Gatekeeper gate;
    RateController controller;
    CamServiceState cam;
    int cam_phase = 0;
    SimTime cam_start{0};  // first CAM check, staggered so vehicles do not start in lockstep
    EventId gate_event = 0;
    SimTime gate_event_at{-1};
  };

  void schedule_periodic();
  void on_cbr_window();
  void on_controller_update();
  void on_cam_tick();
  void on_mobility_tick();
  void on_metrics_sample();
  void on_tx_start(const Transmission& tx);
  void on_tx_end(const Transmission& tx);
  void pump(VehicleId v);
  void enqueue(VehicleId v, const Frame& f);
  void refill_background(VehicleId v);
  VehicleDynamics dynamics_now(VehicleId v) const;
  bool in_window(SimTime t) const { return t >= config_.warmup && t <= config_.duration; }

  RunConfig config_;
  Engine engine_;
  World world_;
  std::unique_ptr<Medium> medium_;
  MetricsStore metrics_;
  std::vector<Vehicle> vehicles_;
  std::vector<std::vector<VehicleId>> cam_buckets_;
  int all_group_ = 0;  // index of "all" (the only group when there is one)
  std::vector<double> cbr_scratch_;
  std::vector<std::array<std::uint64_t, 2>> msg_counts_;  // per group: DP2, DP3 in current second
  SimTime last_mobility_tick_{0};
  SimTime origin_{0};
  bool origin_fixed_ = false;
  bool ran_ = false;
  std::uint64_t next_frame_id_ = 1;
  Duration cam_airtime_{0};
  std::vector<CbrWindowRow> cbr_rows_;
  std::vector<TraceRow> trace_rows_;
};

}  // namespace dcc
