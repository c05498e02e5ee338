#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dcc/engine.hpp"
#include "dcc/geometry.hpp"
#include "dcc/kernels.hpp"
#include "dcc/rng.hpp"

namespace dcc {

enum class ScenarioKind { Oval, TrafficLight, Junction };
std::string_view to_string(ScenarioKind kind);
ScenarioKind parse_scenario(std::string_view name);  // throws ConfigError

enum class Roi { All, Straight, Curve };
std::string_view to_string(Roi roi);
Roi parse_roi(std::string_view name);

struct ScenarioSpec {
  ScenarioKind kind = ScenarioKind::Oval;
  double max_speed = 33.0;      // m/s, road limit
  double lane_width = 3.5;
  double vehicle_length = 5.0;
  /// Desired speed = max_speed * clamp(N(mean, sd), min, 1).
  double speed_factor_mean = 0.82;
  double speed_factor_sd = 0.06;
  double speed_factor_min = 0.6;
  double accel_noise = 0.0;     // m/s^2, std-dev of per-tick noise
  kernels::IdmParams idm;

  // Oval
  double density = 20.0;        // vehicles / km / lane
  int lanes = 4;                // half in each direction
  double loop_length_m = 7750.0;
  double curve_radius_m = 500.0;

  // Traffic light
  int tl_vehicles = 300;
  int tl_lanes = 6;
  double tl_curve_radius_m = 300.0;
  double tl_queue_gap_m = 5.0;  // bumper gap of the queued vehicles

  // Junction
  int large_count = 300;
  int large_lanes = 6;
  int small_count = 25;
  int small_lanes = 2;
  double large_pace = 6.0;      // m/s, speed of the traffic ahead of the large group
  double small_pace = 20.0;     // m/s, approach speed of the platoon
  double small_spacing_m = 15.0;
  double ramp_length_m = 150.0;
  double turn_radius_m = 40.0;

  /// Time before the scenario origin (light turns green / groups meet).
  Duration preroll{std::chrono::seconds(60)};

  void validate() const;
  int lane_count() const;
  bool operator==(const ScenarioSpec&) const = default;
};

/// Kinematic snapshot consumed by the awareness service.
struct VehicleDynamics {
  Position position;
  double speed = 0.0;
  double heading = 0.0;  // degrees in [0, 360)
  double acceleration = 0.0;
  SimTime timestamp{0};
};

struct Pose {
  Position position;
  double heading_deg = 0.0;
};

/// Planar reference line made of straight and circular pieces.
class Path {
 public:
  Path(Position start, double heading_deg) : start_(start), heading0_(heading_deg) {}
  Path& straight(double length);
  /// Positive sweep turns left, negative right.
  Path& arc(double radius, double sweep_deg);
  double length() const { return length_; }
  /// Pose at arc length s; beyond the ends the path continues straight.
  Pose at(double s) const;
  /// Pose shifted `offset` metres to the left of the reference line.
  Pose at(double s, double offset) const;

 private:
  struct Piece {
    double s0;
    double length;
    Position start;
    double heading_deg;
    double radius;  // 0 for straight
    double sweep_deg;
  };
  Position start_;
  double heading0_;
  double length_ = 0.0;
  std::vector<Piece> pieces_;
};

/// Vehicle population and road network for one scenario. Implements the
/// radio-facing Topology.
class World : public Topology {
 public:
  static World build(const ScenarioSpec& spec, std::uint64_t seed);

  /// Advances every vehicle by `dt` (car-following, junction merges).
  void tick(Duration dt, kernels::Policy policy = kernels::Policy::Serial);
  /// Turns the traffic light green.
  void release() { red_light_ = false; }
  bool red_light() const { return red_light_; }

  const ScenarioSpec& spec() const { return spec_; }
  /// Planar kinematics; on the oval the position follows the drawn loop.
  VehicleDynamics dynamics(std::uint32_t id) const;
  double speed(std::uint32_t id) const { return vehicles_[id].speed; }
  int group(std::uint32_t id) const { return vehicles_[id].group; }
  const std::vector<std::string>& group_names() const { return group_names_; }
  bool in_roi(std::uint32_t id, Roi roi) const;
  /// Same test for a radio position (the loop coordinate on the oval).
  bool in_roi(const Position& p, Roi roi) const;
  /// Arc-length coordinate on the vehicle's current road (oval: loop position).
  double arc_position(std::uint32_t id) const;
  int road(std::uint32_t id) const { return vehicles_[id].road; }
  int lane(std::uint32_t id) const { return vehicles_[id].lane; }
  double mean_speed() const;
  /// Smallest bumper-to-bumper gap between consecutive vehicles of any lane.
  double min_gap() const;
  /// Smallest distance between a small-group and a large-group vehicle
  /// (junction only; +inf otherwise).
  double min_group_distance() const;
  double elapsed_s() const { return elapsed_s_; }

  // Topology
  std::size_t size() const override { return vehicles_.size(); }
  Position position(std::uint32_t id) const override { return vehicles_[id].pos; }
  double distance(const Position& a, const Position& b) const override;
  void within(const Position& p, double range, std::vector<std::uint32_t>& out) const override;

 private:
  struct Vehicle {
    int road = 0;
    int lane = 0;
    double s = 0.0;
    double speed = 0.0;
    double accel = 0.0;
    double desired = 0.0;
    double length = 5.0;
    int group = 0;
    Position pos;  // radio position (oval: loop coordinate, lane offset)
    Position geo;  // planar position
    double heading = 0.0;
  };
  struct Road {
    Path path{Position{}, 0.0};
    int lanes = 1;
    bool ring = false;
    double ring_length = 0.0;
    /// Lane direction on the ring: +1 along the path, -1 against.
    std::vector<int> direction;
    /// Pace vehicle ahead of each lane's front vehicle; nullopt = free road.
    std::optional<double> pace;
    std::vector<double> pace_s;
    /// Per-lane stop line used while the light is red.
    std::optional<double> stop_line;
    /// Merge: vehicles past merge_from transfer to road `merge_into`,
    /// s_target = s - merge_from + merge_offset; they stop at merge_until.
    int merge_into = -1;
    double merge_from = 0.0;
    double merge_until = 0.0;
    double merge_offset = 0.0;
  };

  World() = default;
  void place(Vehicle& v) const;
  void rebuild_index();
  void try_merges();
  std::vector<std::vector<std::uint32_t>> lanes_sorted() const;

  ScenarioSpec spec_;
  std::vector<Road> roads_;
  std::vector<Vehicle> vehicles_;
  std::vector<RngStream> noise_;
  std::vector<std::string> group_names_;
  std::vector<std::pair<double, std::uint32_t>> index_;
  bool red_light_ = false;
  bool metric_ring_ = false;
  double ring_length_ = 0.0;
  double elapsed_s_ = 0.0;
  // Oval ROI bounds along the loop
  double roi_straight_lo_ = 0.0, roi_straight_hi_ = 0.0;
  double roi_curve_lo_ = 0.0, roi_curve_hi_ = 0.0;

  // scratch buffers for the car-following kernel
  std::vector<double> gap_, lead_speed_, speed_buf_, desired_buf_, accel_buf_;
};

/// Steady-state IDM speed for a bumper gap and desired speed (bisection).
double idm_equilibrium_speed(const kernels::IdmParams& p, double gap, double desired);

}  // namespace dcc
