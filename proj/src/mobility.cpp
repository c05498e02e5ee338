#include "dcc/mobility.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace dcc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kDeg = std::numbers::pi / 180.0;

double wrap_heading(double deg) {
  double h = std::fmod(deg, 360.0);
  if (h < 0) h += 360.0;
  return h >= 360.0 ? 0.0 : h;
}

double wrap_loop(double s, double length) {
  double x = std::fmod(s, length);
  if (x < 0) x += length;
  return x >= length ? 0.0 : x;
}

double equilibrium_gap(const kernels::IdmParams& p, double v, double desired) {
  const double ratio = v / desired;
  const double free = 1.0 - ratio * ratio * ratio * ratio;
  if (free <= 0) return kInf;
  return (p.min_gap + v * p.headway) / std::sqrt(free);
}

}  // namespace

std::string_view to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::Oval: return "oval";
    case ScenarioKind::TrafficLight: return "traffic-light";
    case ScenarioKind::Junction: return "junction";
  }
  return "?";
}

ScenarioKind parse_scenario(std::string_view name) {
  if (name == "oval") return ScenarioKind::Oval;
  if (name == "traffic-light") return ScenarioKind::TrafficLight;
  if (name == "junction") return ScenarioKind::Junction;
  throw ConfigError("scenario.kind", "unknown scenario '" + std::string(name) +
                                         "' (valid: oval, traffic-light, junction)");
}

std::string_view to_string(Roi roi) {
  switch (roi) {
    case Roi::All: return "all";
    case Roi::Straight: return "straight";
    case Roi::Curve: return "curve";
  }
  return "?";
}

Roi parse_roi(std::string_view name) {
  if (name == "all") return Roi::All;
  if (name == "straight") return Roi::Straight;
  if (name == "curve") return Roi::Curve;
  throw ConfigError("metrics.roi", "unknown region '" + std::string(name) +
                                       "' (valid: all, straight, curve)");
}

void ScenarioSpec::validate() const {
  auto positive = [](double v, const char* field) {
    if (!(v > 0) || !std::isfinite(v)) throw ConfigError(field, "must be positive");
  };
  positive(max_speed, "scenario.max_speed");
  positive(lane_width, "scenario.lane_width");
  positive(vehicle_length, "scenario.vehicle_length");
  positive(speed_factor_mean, "scenario.speed_factor_mean");
  if (speed_factor_sd < 0) throw ConfigError("scenario.speed_factor_sd", "must be >= 0");
  if (!(speed_factor_min > 0 && speed_factor_min <= 1))
    throw ConfigError("scenario.speed_factor_min", "must be in (0, 1]");
  if (accel_noise < 0) throw ConfigError("scenario.accel_noise", "must be >= 0");
  positive(idm.max_accel, "mobility.idm.max_accel");
  positive(idm.comfort_decel, "mobility.idm.comfort_decel");
  positive(idm.min_gap, "mobility.idm.min_gap");
  positive(idm.headway, "mobility.idm.headway");
  positive(idm.max_decel, "mobility.idm.max_decel");
  if (preroll < Duration::zero()) throw ConfigError("scenario.preroll", "must be >= 0");
  switch (kind) {
    case ScenarioKind::Oval: {
      positive(density, "scenario.density");
      positive(loop_length_m, "scenario.loop_length");
      positive(curve_radius_m, "scenario.curve_radius");
      if (lanes < 2 || lanes % 2 != 0) throw ConfigError("scenario.lanes", "must be even and >= 2");
      if (2 * std::numbers::pi * curve_radius_m >= loop_length_m)
        throw ConfigError("scenario.curve_radius", "curves longer than the loop");
      const double spacing = 1000.0 / density;
      if (spacing <= vehicle_length + idm.min_gap)
        throw ConfigError("scenario.density", "vehicles do not fit in the lane");
      break;
    }
    case ScenarioKind::TrafficLight:
      if (tl_vehicles <= 0) throw ConfigError("scenario.tl_vehicles", "must be positive");
      if (tl_lanes <= 0) throw ConfigError("scenario.lanes", "must be positive");
      positive(tl_curve_radius_m, "scenario.tl_curve_radius");
      if (!(tl_queue_gap_m >= idm.min_gap)) throw ConfigError("scenario.tl_queue_gap", "must be >= mobility.idm.min_gap");
      break;
    case ScenarioKind::Junction:
      if (large_count <= 0) throw ConfigError("scenario.large_count", "must be positive");
      if (small_count <= 0) throw ConfigError("scenario.small_count", "must be positive");
      if (large_lanes <= 0) throw ConfigError("scenario.large_lanes", "must be positive");
      if (small_lanes <= 0 || small_lanes > large_lanes)
        throw ConfigError("scenario.small_lanes", "must be in [1, large_lanes]");
      positive(large_pace, "scenario.large_pace");
      positive(small_pace, "scenario.small_pace");
      positive(ramp_length_m, "scenario.ramp_length");
      positive(turn_radius_m, "scenario.turn_radius");
      if (small_spacing_m <= vehicle_length + idm.min_gap)
        throw ConfigError("scenario.small_spacing", "vehicles do not fit");
      break;
  }
}

int ScenarioSpec::lane_count() const {
  switch (kind) {
    case ScenarioKind::Oval: return lanes;
    case ScenarioKind::TrafficLight: return tl_lanes;
    case ScenarioKind::Junction: return large_lanes + small_lanes;
  }
  return 0;
}

// ---------------------------------------------------------------- Path

Path& Path::straight(double length) {
  if (!(length > 0)) throw InputError("path: straight length must be positive");
  const Pose end = at(length_);
  pieces_.push_back({length_, length, end.position, end.heading_deg, 0.0, 0.0});
  length_ += length;
  return *this;
}

Path& Path::arc(double radius, double sweep_deg) {
  if (!(radius > 0) || sweep_deg == 0) throw InputError("path: bad arc");
  const Pose end = at(length_);
  const double len = radius * std::abs(sweep_deg) * kDeg;
  pieces_.push_back({length_, len, end.position, end.heading_deg, radius, sweep_deg});
  length_ += len;
  return *this;
}

namespace {

Pose arc_pose(const Position& start, double heading_deg, double radius, double sweep_deg, double u) {
  const double h0 = heading_deg * kDeg;
  const double turn = sweep_deg > 0 ? 1.0 : -1.0;
  // centre lies to the left (turn > 0) or right of the start heading
  const double cx = start.x - turn * radius * std::sin(h0);
  const double cy = start.y + turn * radius * std::cos(h0);
  const double h = h0 + u / radius * turn;
  return {{cx + turn * radius * std::sin(h), cy - turn * radius * std::cos(h)}, wrap_heading(h / kDeg)};
}

}  // namespace

Pose Path::at(double s) const {
  if (pieces_.empty() || s < 0) {
    const double h = (pieces_.empty() ? heading0_ : pieces_.front().heading_deg) * kDeg;
    const Position p0 = pieces_.empty() ? start_ : pieces_.front().start;
    return {{p0.x + s * std::cos(h), p0.y + s * std::sin(h)}, wrap_heading(h / kDeg)};
  }
  auto it = std::upper_bound(pieces_.begin(), pieces_.end(), s,
                             [](double v, const Piece& p) { return v < p.s0; });
  const Piece& pc = *std::prev(it);
  const double u = s - pc.s0;
  if (pc.radius != 0.0 && u <= pc.length)
    return arc_pose(pc.start, pc.heading_deg, pc.radius, pc.sweep_deg, u);
  // straight piece, or continuation past the final arc
  Pose from{pc.start, pc.heading_deg};
  double along = u;
  if (pc.radius != 0.0) {
    from = arc_pose(pc.start, pc.heading_deg, pc.radius, pc.sweep_deg, pc.length);
    along = u - pc.length;
  }
  const double h = from.heading_deg * kDeg;
  return {{from.position.x + along * std::cos(h), from.position.y + along * std::sin(h)},
          wrap_heading(from.heading_deg)};
}

Pose Path::at(double s, double offset) const {
  Pose p = at(s);
  const double h = p.heading_deg * kDeg;
  p.position.x -= offset * std::sin(h);
  p.position.y += offset * std::cos(h);
  return p;
}

double idm_equilibrium_speed(const kernels::IdmParams& p, double gap, double desired) {
  if (gap <= p.min_gap) return 0.0;
  double lo = 0.0, hi = desired;
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (equilibrium_gap(p, mid, desired) < gap) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

// ---------------------------------------------------------------- World

World World::build(const ScenarioSpec& spec, std::uint64_t seed) {
  spec.validate();
  World w;
  w.spec_ = spec;
  RngStream rng(seed, "mobility");
  auto desired = [&] {
    double f = rng.normal(spec.speed_factor_mean, spec.speed_factor_sd);
    f = std::clamp(f, spec.speed_factor_min, 1.0);
    return f * spec.max_speed;
  };
  const double len = spec.vehicle_length;
  const double s0 = spec.idm.min_gap;

  switch (spec.kind) {
    case ScenarioKind::Oval: {
      const double L = spec.loop_length_m;
      const double R = spec.curve_radius_m;
      const double straight = (L - 2 * std::numbers::pi * R) / 2;
      Road road;
      road.path = Path({0, 0}, 0).straight(straight).arc(R, 180).straight(straight).arc(R, 180);
      road.lanes = spec.lanes;
      road.ring = true;
      road.ring_length = L;
      for (int l = 0; l < spec.lanes; ++l) road.direction.push_back(l < spec.lanes / 2 ? 1 : -1);
      w.roads_.push_back(std::move(road));
      w.metric_ring_ = true;
      w.ring_length_ = L;
      w.roi_straight_lo_ = std::max(0.0, straight / 2 - 500.0);
      w.roi_straight_hi_ = std::min(straight, straight / 2 + 500.0);
      w.roi_curve_lo_ = straight;
      w.roi_curve_hi_ = straight + std::numbers::pi * R;
      w.group_names_ = {"all"};

      // The total is rounded once; the remainder goes to the first lanes.
      const auto total = static_cast<int>(std::llround(spec.density * spec.lanes * L / 1000.0));
      for (int l = 0; l < spec.lanes; ++l) {
        const int per_lane = total / spec.lanes + (l < total % spec.lanes ? 1 : 0);
        const double spacing = L / per_lane;
        const double jitter = std::max(0.0, 0.25 * (spacing - len - s0));
        const double phase = rng.uniform(0.0, spacing);
        for (int k = 0; k < per_lane; ++k) {
          Vehicle v;
          v.road = 0;
          v.lane = l;
          v.length = len;
          v.s = wrap_loop(phase + k * spacing + rng.uniform(-jitter, jitter), L);
          v.desired = desired();
          v.speed = idm_equilibrium_speed(spec.idm, spacing - len, v.desired);
          w.vehicles_.push_back(v);
        }
      }
      break;
    }
    case ScenarioKind::TrafficLight: {
      const int lanes = spec.tl_lanes;
      const int per_lane = (spec.tl_vehicles + lanes - 1) / lanes;
      const double pitch = len + spec.tl_queue_gap_m;
      const double queue = per_lane * pitch + 50.0;
      Road road;
      road.path = Path({-queue, 0}, 0)
                      .straight(queue + 50.0)
                      .arc(spec.tl_curve_radius_m, 90)
                      .straight(20000.0);
      road.lanes = lanes;
      road.stop_line = queue;
      w.roads_.push_back(std::move(road));
      w.red_light_ = true;
      w.group_names_ = {"all"};
      int placed = 0;
      for (int k = 0; placed < spec.tl_vehicles; ++k) {
        for (int l = 0; l < lanes && placed < spec.tl_vehicles; ++l, ++placed) {
          Vehicle v;
          v.road = 0;
          v.lane = l;
          v.length = len;
          v.s = queue - 1.0 - k * pitch;
          v.desired = desired();
          v.speed = 0.0;
          w.vehicles_.push_back(v);
        }
      }
      break;
    }
    case ScenarioKind::Junction: {
      const double pre = to_seconds(spec.preroll);
      const double v_large = spec.large_pace;
      const double v_small = spec.small_pace;
      const double w_lane = spec.lane_width;
      const double mean_desired = spec.max_speed * spec.speed_factor_mean;
      const double large_spacing = equilibrium_gap(spec.idm, v_large, mean_desired) + len;
      const int large_per_lane = (spec.large_count + spec.large_lanes - 1) / spec.large_lanes;
      const double large_length = large_per_lane * large_spacing;
      const double small_per_lane = (spec.small_count + spec.small_lanes - 1) / spec.small_lanes;
      const double small_length = small_per_lane * spec.small_spacing_m;
      const double sense = 750.0;

      // Highway runs east along y = 0 .. (lanes-1)*w; the ramp joins at x = 0.
      const double x0 = 2000.0 + large_length + pre * v_large;
      Road highway;
      highway.path = Path({-x0, 0}, 0).straight(x0 + 50000.0);
      highway.lanes = spec.large_lanes;
      highway.pace = v_large;
      // Side road approaches from the south and turns right onto the ramp,
      // which runs parallel to the highway just below lane 0.
      const double rt = spec.turn_radius_m;
      const double ramp_y = -w_lane * spec.small_lanes;
      // Front of the platoon sits `sense` metres south of the highway at t=0.
      const double approach = sense + ramp_y - rt;  // remaining straight at t=0
      const double side_straight = approach + pre * v_small + small_length + 200.0;
      Road side;
      side.path = Path({-rt, ramp_y - rt - side_straight}, 90)
                      .straight(side_straight)
                      .arc(rt, -90)
                      .straight(spec.ramp_length_m);
      side.lanes = spec.small_lanes;
      side.pace = v_small;
      side.merge_into = 0;
      side.merge_from = side_straight + rt * std::numbers::pi / 2;
      side.merge_until = side.merge_from + spec.ramp_length_m;
      side.merge_offset = x0;
      w.roads_.push_back(std::move(highway));
      w.roads_.push_back(std::move(side));
      w.group_names_ = {"large", "small"};

      // Large group centred on the junction at t=0, shifted back by the pre-roll.
      const double large_front0 = x0 + large_length / 2 - pre * v_large;
      int placed = 0;
      for (int k = 0; placed < spec.large_count; ++k) {
        for (int l = 0; l < spec.large_lanes && placed < spec.large_count; ++l, ++placed) {
          Vehicle v;
          v.road = 0;
          v.lane = l;
          v.length = len;
          v.group = 0;
          v.s = large_front0 - k * large_spacing;
          v.desired = desired();
          v.speed = v_large;
          w.vehicles_.push_back(v);
        }
      }
      const double small_front0 = side_straight - approach - pre * v_small;
      placed = 0;
      for (int k = 0; placed < spec.small_count; ++k) {
        for (int l = 0; l < spec.small_lanes && placed < spec.small_count; ++l, ++placed) {
          Vehicle v;
          v.road = 1;
          v.lane = l;
          v.length = len;
          v.group = 1;
          v.s = small_front0 - k * spec.small_spacing_m;
          v.desired = desired();
          v.speed = v_small;
          w.vehicles_.push_back(v);
        }
      }
      break;
    }
  }

  for (Road& road : w.roads_) {
    if (!road.pace) continue;
    road.pace_s.assign(static_cast<std::size_t>(road.lanes), -kInf);
  }
  // Pace vehicles start one equilibrium gap ahead of each lane's front vehicle.
  for (const Vehicle& v : w.vehicles_) {
    Road& road = w.roads_[static_cast<std::size_t>(v.road)];
    if (!road.pace) continue;
    const double gap = equilibrium_gap(spec.idm, *road.pace, v.desired);
    auto& ps = road.pace_s[static_cast<std::size_t>(v.lane)];
    ps = std::max(ps, v.s + std::min(gap, 200.0) + len);
  }

  w.noise_.reserve(w.vehicles_.size());
  for (std::size_t i = 0; i < w.vehicles_.size(); ++i) w.noise_.emplace_back(seed, "mobility-noise", i);
  for (Vehicle& v : w.vehicles_) w.place(v);
  w.rebuild_index();
  return w;
}

void World::place(Vehicle& v) const {
  const Road& road = roads_[static_cast<std::size_t>(v.road)];
  const double offset = v.lane * spec_.lane_width;
  if (road.ring) {
    const int dir = road.direction[static_cast<std::size_t>(v.lane)];
    const double x = dir > 0 ? v.s : wrap_loop(road.ring_length - v.s, road.ring_length);
    v.pos = {x, offset};
    const Pose pose = road.path.at(x, (v.lane + 0.5 - road.lanes / 2.0) * spec_.lane_width);
    v.geo = pose.position;
    v.heading = wrap_heading(dir > 0 ? pose.heading_deg : pose.heading_deg + 180.0);
    return;
  }
  const Pose pose = road.path.at(v.s, offset);
  v.pos = pose.position;
  v.geo = pose.position;
  v.heading = pose.heading_deg;
}

std::vector<std::vector<std::uint32_t>> World::lanes_sorted() const {
  std::vector<std::size_t> base(roads_.size() + 1, 0);
  for (std::size_t r = 0; r < roads_.size(); ++r)
    base[r + 1] = base[r] + static_cast<std::size_t>(roads_[r].lanes);
  std::vector<std::vector<std::uint32_t>> lanes(base.back());
  for (std::uint32_t i = 0; i < vehicles_.size(); ++i) {
    const Vehicle& v = vehicles_[i];
    lanes[base[static_cast<std::size_t>(v.road)] + static_cast<std::size_t>(v.lane)].push_back(i);
  }
  for (auto& lane : lanes) {
    std::sort(lane.begin(), lane.end(), [this](std::uint32_t a, std::uint32_t b) {
      if (vehicles_[a].s != vehicles_[b].s) return vehicles_[a].s > vehicles_[b].s;
      return a < b;
    });
  }
  return lanes;
}

void World::tick(Duration dt_us, kernels::Policy policy) {
  const double dt = to_seconds(dt_us);
  if (!(dt > 0)) throw InputError("mobility tick must be positive");
  const std::size_t n = vehicles_.size();
  gap_.assign(n, kInf);
  lead_speed_.assign(n, 0.0);
  speed_buf_.resize(n);
  desired_buf_.resize(n);
  accel_buf_.assign(n, 0.0);

  const auto lanes = lanes_sorted();
  std::size_t lane_index = 0;
  for (std::size_t r = 0; r < roads_.size(); ++r) {
    const Road& road = roads_[r];
    for (int l = 0; l < road.lanes; ++l, ++lane_index) {
      const auto& order = lanes[lane_index];
      for (std::size_t k = 0; k < order.size(); ++k) {
        const std::uint32_t id = order[k];
        const Vehicle& v = vehicles_[id];
        double gap = kInf;
        double lead = v.speed;
        if (k > 0) {
          const Vehicle& ahead = vehicles_[order[k - 1]];
          gap = ahead.s - ahead.length - v.s;
          lead = ahead.speed;
        } else if (road.ring && order.size() > 1) {
          const Vehicle& ahead = vehicles_[order.back()];
          gap = ahead.s + road.ring_length - ahead.length - v.s;
          lead = ahead.speed;
        } else if (road.pace) {
          const double ps = road.pace_s[static_cast<std::size_t>(l)];
          if (road.merge_into < 0 || ps < road.merge_from) {
            gap = ps - v.length - v.s;
            lead = *road.pace;
          }
        }
        if (road.stop_line && red_light_ && v.s <= *road.stop_line && *road.stop_line - v.s < gap) {
          gap = *road.stop_line - v.s;
          lead = 0.0;
        }
        if (road.merge_into >= 0 && road.merge_until - v.s < gap) {
          gap = road.merge_until - v.s;
          lead = 0.0;
        }
        gap_[id] = gap;
        lead_speed_[id] = lead;
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    speed_buf_[i] = vehicles_[i].speed;
    desired_buf_[i] = vehicles_[i].desired;
  }
  kernels::idm_accelerations(policy, spec_.idm,
                             kernels::IdmInputs{gap_, speed_buf_, lead_speed_, desired_buf_},
                             accel_buf_);

  // Integrate front to back so each vehicle can be kept behind its updated leader.
  lane_index = 0;
  for (std::size_t r = 0; r < roads_.size(); ++r) {
    const Road& road = roads_[r];
    for (int l = 0; l < road.lanes; ++l, ++lane_index) {
      const auto& order = lanes[lane_index];
      for (std::size_t k = 0; k < order.size(); ++k) {
        const std::uint32_t id = order[k];
        Vehicle& v = vehicles_[id];
        if (road.stop_line && red_light_) {
          // held at the signal until release
          v.accel = 0.0;
          v.speed = 0.0;
          continue;
        }
        double a = accel_buf_[id];
        if (spec_.accel_noise > 0 && v.speed > 0) a += noise_[id].normal(0.0, spec_.accel_noise);
        a = std::clamp(a, -spec_.idm.max_decel, spec_.idm.max_accel);
        double v_new = v.speed + a * dt;
        double ds;
        if (v_new < 0) {
          ds = a < 0 ? -v.speed * v.speed / (2 * a) : 0.0;
          v_new = 0.0;
        } else {
          ds = (v.speed + v_new) * 0.5 * dt;
        }
        double s_new = v.s + ds;
        if (k > 0 || (road.ring && order.size() > 1)) {
          // the ring front is checked against the not yet moved rear vehicle
          const Vehicle& ahead = vehicles_[k > 0 ? order[k - 1] : order.back()];
          const double wrap = k > 0 ? 0.0 : road.ring_length;
          const double limit = ahead.s + wrap - ahead.length - 0.1;
          if (s_new > limit) {
            s_new = std::max(v.s, limit);
            v_new = std::min(v_new, ahead.speed);
          }
        }
        v.accel = (v_new - v.speed) / dt;
        v.speed = v_new;
        v.s = s_new;
      }
      if (road.ring) {
        for (std::uint32_t id : order) vehicles_[id].s = wrap_loop(vehicles_[id].s, road.ring_length);
      }
    }
  }
  for (Road& road : roads_) {
    if (!road.pace) continue;
    for (double& ps : road.pace_s) ps += *road.pace * dt;
  }
  try_merges();
  for (Vehicle& v : vehicles_) place(v);
  rebuild_index();
  elapsed_s_ += dt;
}

void World::try_merges() {
  std::vector<std::uint32_t> candidates;
  for (std::uint32_t i = 0; i < vehicles_.size(); ++i) {
    const Road& road = roads_[static_cast<std::size_t>(vehicles_[i].road)];
    if (road.merge_into >= 0 && vehicles_[i].s >= road.merge_from) candidates.push_back(i);
  }
  std::sort(candidates.begin(), candidates.end(), [this](std::uint32_t a, std::uint32_t b) {
    if (vehicles_[a].s != vehicles_[b].s) return vehicles_[a].s > vehicles_[b].s;
    return a < b;
  });
  const double s0 = spec_.idm.min_gap;
  const double T = spec_.idm.headway;
  for (std::uint32_t id : candidates) {
    Vehicle& v = vehicles_[id];
    const Road& road = roads_[static_cast<std::size_t>(v.road)];
    const int target_road = road.merge_into;
    const double s_t = v.s - road.merge_from + road.merge_offset;
    double lead_gap = kInf, follow_gap = kInf, follow_speed = 0.0;
    for (const Vehicle& o : vehicles_) {
      if (o.road != target_road || o.lane != v.lane) continue;
      if (o.s >= s_t) {
        lead_gap = std::min(lead_gap, o.s - o.length - s_t);
      } else {
        const double g = s_t - v.length - o.s;
        if (g < follow_gap) {
          follow_gap = g;
          follow_speed = o.speed;
        }
      }
    }
    if (lead_gap >= s0 + 0.5 * v.speed * T && follow_gap >= s0 + 0.5 * follow_speed * T) {
      v.road = target_road;
      v.s = s_t;
    }
  }
}

void World::rebuild_index() {
  index_.resize(vehicles_.size());
  for (std::uint32_t i = 0; i < vehicles_.size(); ++i) index_[i] = {vehicles_[i].pos.x, i};
  std::sort(index_.begin(), index_.end());
}

VehicleDynamics World::dynamics(std::uint32_t id) const {
  const Vehicle& v = vehicles_[id];
  VehicleDynamics d;
  d.position = v.geo;
  d.speed = v.speed;
  d.heading = v.heading;
  d.acceleration = v.accel;
  return d;
}

bool World::in_roi(std::uint32_t id, Roi roi) const { return in_roi(vehicles_[id].pos, roi); }

bool World::in_roi(const Position& p, Roi roi) const {
  if (roi == Roi::All || !metric_ring_) return true;
  const double x = p.x;
  if (roi == Roi::Straight) return x >= roi_straight_lo_ && x < roi_straight_hi_;
  return x >= roi_curve_lo_ && x < roi_curve_hi_;
}

double World::arc_position(std::uint32_t id) const {
  return metric_ring_ ? vehicles_[id].pos.x : vehicles_[id].s;
}

double World::mean_speed() const {
  if (vehicles_.empty()) return 0.0;
  double sum = 0.0;
  for (const Vehicle& v : vehicles_) sum += v.speed;
  return sum / static_cast<double>(vehicles_.size());
}

double World::min_gap() const {
  double best = kInf;
  const auto lanes = lanes_sorted();
  std::size_t lane_index = 0;
  for (const Road& road : roads_) {
    for (int l = 0; l < road.lanes; ++l, ++lane_index) {
      const auto& order = lanes[lane_index];
      for (std::size_t k = 1; k < order.size(); ++k) {
        const Vehicle& a = vehicles_[order[k - 1]];
        best = std::min(best, a.s - a.length - vehicles_[order[k]].s);
      }
      if (road.ring && order.size() > 1) {
        const Vehicle& a = vehicles_[order.back()];
        best = std::min(best, a.s + road.ring_length - a.length - vehicles_[order.front()].s);
      }
    }
  }
  return best;
}

double World::min_group_distance() const {
  if (spec_.kind != ScenarioKind::Junction) return kInf;
  double best = kInf;
  for (const Vehicle& a : vehicles_) {
    if (a.group != 1) continue;
    for (const Vehicle& b : vehicles_) {
      if (b.group != 0) continue;
      best = std::min(best, distance(a.pos, b.pos));
    }
  }
  return best;
}

double World::distance(const Position& a, const Position& b) const {
  double dx = std::abs(a.x - b.x);
  if (metric_ring_) dx = std::min(dx, ring_length_ - dx);
  return std::hypot(dx, a.y - b.y);
}

void World::within(const Position& p, double range, std::vector<std::uint32_t>& out) const {
  auto scan = [&](double lo, double hi) {
    auto it = std::lower_bound(index_.begin(), index_.end(), std::pair{lo, std::uint32_t{0}});
    for (; it != index_.end() && it->first <= hi; ++it) {
      if (distance(p, vehicles_[it->second].pos) <= range) out.push_back(it->second);
    }
  };
  if (!metric_ring_ || 2 * range >= ring_length_) {
    if (metric_ring_) {
      scan(0.0, ring_length_);
    } else {
      scan(p.x - range, p.x + range);
    }
    return;
  }
  const double lo = p.x - range;
  const double hi = p.x + range;
  if (lo < 0) {
    scan(lo + ring_length_, ring_length_);
    scan(0.0, hi);
  } else if (hi >= ring_length_) {
    scan(lo, ring_length_);
    scan(0.0, hi - ring_length_);
  } else {
    scan(lo, hi);
  }
}

}  // namespace dcc
