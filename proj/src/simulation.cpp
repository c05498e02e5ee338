#include "dcc/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace dcc {

namespace {

std::vector<std::string> metric_groups(const World& world) {
  std::vector<std::string> g = world.group_names();
  if (g.size() > 1) g.emplace_back("all");
  return g;
}

std::vector<int> vehicle_groups(const World& world) {
  std::vector<int> out(world.size());
  for (std::uint32_t i = 0; i < world.size(); ++i) out[i] = world.group(i);
  return out;
}

std::vector<bool> pick_sample(std::size_t n, int sample_size, std::uint64_t seed) {
  std::vector<bool> chosen(n, false);
  if (sample_size <= 0 || static_cast<std::size_t>(sample_size) >= n) {
    chosen.assign(n, true);
    return chosen;
  }
  std::vector<std::uint32_t> ids(n);
  std::iota(ids.begin(), ids.end(), 0u);
  RngStream rng(seed, "sampling");
  for (std::size_t i = 0; i < static_cast<std::size_t>(sample_size); ++i) {
    const auto j = static_cast<std::size_t>(rng.uniform_int(i, n - 1));
    std::swap(ids[i], ids[j]);
    chosen[ids[i]] = true;
  }
  return chosen;
}

}  // namespace

Simulation::Simulation(const RunConfig& config)
    : config_((config.validate(), config)),
      world_(World::build(config_.scenario, config_.seed)),
      medium_(std::make_unique<Medium>(engine_, world_, config_.radio, config_.seed)),
      metrics_(metric_groups(world_), vehicle_groups(world_),
               pick_sample(world_.size(), config_.metrics.sample_size, config_.seed)) {
  const std::size_t n = world_.size();
  vehicles_.reserve(n);
  for (std::size_t i = 0; i < n; ++i) vehicles_.emplace_back(config_.controller, config_.traffic.queue_capacity);

  const auto check_ms = static_cast<int>(config_.traffic.cam_params.check_period.count() / 1000);
  cam_buckets_.assign(static_cast<std::size_t>(check_ms), {});
  RngStream phase_rng(config_.seed, "cam-phase");
  for (VehicleId v = 0; v < n; ++v) {
    const int phase = static_cast<int>(phase_rng.uniform_int(0, check_ms - 1));
    vehicles_[v].cam_phase = phase;
    const auto periods = config_.traffic.cam_params.max_interval.count() / config_.traffic.cam_params.check_period.count();
    const std::int64_t k = phase_rng.uniform_int(0, std::max<std::int64_t>(periods - 1, 0));
    vehicles_[v].cam_start = SimTime{std::chrono::milliseconds(phase)} + k * config_.traffic.cam_params.check_period;
    cam_buckets_[static_cast<std::size_t>(phase)].push_back(v);
  }

  all_group_ = static_cast<int>(metrics_.groups().size()) - 1;
  msg_counts_.assign(metrics_.groups().size(), {0, 0});
  cbr_scratch_.assign(n, 0.0);
  cam_airtime_ = airtime(config_.traffic.cam_params.size_bytes, config_.radio);

  medium_->on_tx_start([this](const Transmission& tx) { on_tx_start(tx); });
  medium_->on_tx_end([this](const Transmission& tx) { on_tx_end(tx); });

  switch (config_.scenario.kind) {
    case ScenarioKind::Oval:
      origin_fixed_ = true;
      break;
    case ScenarioKind::TrafficLight:
      origin_ = config_.scenario.preroll;
      origin_fixed_ = true;
      break;
    case ScenarioKind::Junction:
      origin_ = config_.scenario.preroll;  // replaced when the groups meet
      break;
  }
}

void Simulation::run() {
  if (ran_) throw InputError("Simulation::run may only be called once");
  ran_ = true;
  for (VehicleId v = 0; v < vehicles_.size(); ++v) {
    Vehicle& ve = vehicles_[v];
    ve.gate.set_limit(ve.controller.limit());
    ve.cam.t_gen_dcc = ve.gate.facilities_feedback(cam_airtime_);
    refill_background(v);
    pump(v);
  }
  if (config_.output.trace) on_mobility_tick();
  schedule_periodic();
  engine_.run_until(config_.duration);
  metrics_.shift_series(-to_seconds(origin_));
}

void Simulation::schedule_periodic() {
  engine_.schedule(config_.controller.params.t_cbr, EventKind::CbrWindowEnd, [this] { on_cbr_window(); });
  engine_.schedule(SimTime{0}, EventKind::CamCheck, [this] { on_cam_tick(); });
  engine_.schedule(config_.mobility_tick, EventKind::MobilityTick, [this] { on_mobility_tick(); });
  engine_.schedule(std::chrono::seconds(1), EventKind::MetricsSample, [this] { on_metrics_sample(); });
  if (config_.scenario.kind == ScenarioKind::TrafficLight) {
    engine_.schedule(config_.scenario.preroll, EventKind::ScenarioPhase, [this] { world_.release(); });
  }
}

void Simulation::on_cbr_window() {
  const SimTime now = engine_.now();
  const Duration t_cbr = config_.controller.params.t_cbr;
  medium_->close_cbr_windows(now, cbr_scratch_, config_.policy);
  const std::size_t groups = metrics_.groups().size();
  std::vector<double> sum(groups, 0.0);
  std::vector<std::size_t> count(groups, 0);
  for (VehicleId v = 0; v < vehicles_.size(); ++v) {
    vehicles_[v].controller.on_cbr_window(cbr_scratch_[v], now);
    const auto g = static_cast<std::size_t>(world_.group(v));
    sum[g] += cbr_scratch_[v];
    ++count[g];
    if (static_cast<std::size_t>(all_group_) != g) {
      sum[static_cast<std::size_t>(all_group_)] += cbr_scratch_[v];
      ++count[static_cast<std::size_t>(all_group_)];
    }
    if (config_.output.cbr_windows) cbr_rows_.push_back({v, now - t_cbr, cbr_scratch_[v]});
  }
  for (std::size_t g = 0; g < groups; ++g) {
    if (count[g] > 0) metrics_.add_series(to_seconds(now), Quantity::Cbr, static_cast<int>(g), sum[g] / static_cast<double>(count[g]));
  }
  if (now.count() % config_.controller_period().count() == 0) {
    engine_.schedule(now, EventKind::ControllerUpdate, [this] { on_controller_update(); });
  }
  if (now + t_cbr <= config_.duration) {
    engine_.schedule(now + t_cbr, EventKind::CbrWindowEnd, [this] { on_cbr_window(); });
  }
}

void Simulation::on_controller_update() {
  const SimTime now = engine_.now();
  const std::size_t groups = metrics_.groups().size();
  std::vector<double> sum(groups, 0.0);
  std::vector<std::size_t> count(groups, 0);
  for (VehicleId v = 0; v < vehicles_.size(); ++v) {
    Vehicle& ve = vehicles_[v];
    ve.gate.set_limit(ve.controller.update(now));
    ve.cam.t_gen_dcc = ve.gate.facilities_feedback(cam_airtime_);
    const auto g = static_cast<std::size_t>(world_.group(v));
    sum[g] += ve.controller.delta();
    ++count[g];
    if (static_cast<std::size_t>(all_group_) != g) {
      sum[static_cast<std::size_t>(all_group_)] += ve.controller.delta();
      ++count[static_cast<std::size_t>(all_group_)];
    }
    pump(v);
  }
  const Algorithm algo = config_.controller.algorithm;
  if (algo == Algorithm::EdcaOnly || algo == Algorithm::Reactive) return;
  for (std::size_t g = 0; g < groups; ++g) {
    if (count[g] > 0) metrics_.add_series(to_seconds(now), Quantity::Delta, static_cast<int>(g), sum[g] / static_cast<double>(count[g]));
  }
}

VehicleDynamics Simulation::dynamics_now(VehicleId v) const {
  VehicleDynamics d = world_.dynamics(v);
  const double dt = to_seconds(engine_.now() - last_mobility_tick_);
  if (dt > 0) {
    const double h = d.heading * std::numbers::pi / 180.0;
    const double v_end = std::max(0.0, d.speed + d.acceleration * dt);
    const double ds = 0.5 * (d.speed + v_end) * dt;
    d.position.x += ds * std::cos(h);
    d.position.y += ds * std::sin(h);
    d.speed = v_end;
  }
  d.timestamp = engine_.now();
  return d;
}

void Simulation::on_cam_tick() {
  const SimTime now = engine_.now();
  if (config_.traffic.cam) {
    const auto bucket = static_cast<std::size_t>((now.count() / 1000) % static_cast<std::int64_t>(cam_buckets_.size()));
    for (VehicleId v : cam_buckets_[bucket]) {
      Vehicle& ve = vehicles_[v];
      if (now < ve.cam_start) continue;
      const VehicleDynamics d = dynamics_now(v);
      if (!cam_check(now, d, ve.cam, config_.traffic.cam_params)) continue;
      const Frame f = cam_build(now, v, d, ve.cam, config_.traffic.cam_params, next_frame_id_++);
      metrics_.log_cam(v, now, in_window(now) && world_.in_roi(v, config_.metrics.roi));
      enqueue(v, f);
      pump(v);
    }
  }
  const SimTime next = now + std::chrono::milliseconds(1);
  if (next <= config_.duration) engine_.schedule(next, EventKind::CamCheck, [this] { on_cam_tick(); });
}

void Simulation::on_mobility_tick() {
  const SimTime now = engine_.now();
  if (now > SimTime::zero()) {
    world_.tick(now - last_mobility_tick_, config_.policy);
    last_mobility_tick_ = now;
  }
  if (!origin_fixed_ && world_.min_group_distance() <= config_.radio.sense_range_m) {
    origin_ = now;
    origin_fixed_ = true;
  }
  if (config_.output.trace) {
    for (VehicleId v = 0; v < world_.size(); ++v) {
      const VehicleDynamics d = world_.dynamics(v);
      trace_rows_.push_back({v, now, d.position.x, d.position.y, d.speed, d.heading});
    }
  }
  const SimTime next = now + config_.mobility_tick;
  if (now > SimTime::zero() || !config_.output.trace) {
    if (next <= config_.duration) engine_.schedule(next, EventKind::MobilityTick, [this] { on_mobility_tick(); });
  }
}

void Simulation::on_metrics_sample() {
  const SimTime now = engine_.now();
  const std::size_t groups = metrics_.groups().size();
  std::vector<std::size_t> size(groups, 0);
  for (VehicleId v = 0; v < world_.size(); ++v) {
    ++size[static_cast<std::size_t>(world_.group(v))];
    if (groups > 1) ++size[static_cast<std::size_t>(all_group_)];
  }
  for (std::size_t g = 0; g < groups; ++g) {
    if (size[g] == 0) continue;
    const double n = static_cast<double>(size[g]);
    // The rate describes the second that just ended; stamp it at its start.
    const double t = to_seconds(now) - 1.0;
    metrics_.add_series(t, Quantity::MsgRateDp2, static_cast<int>(g), static_cast<double>(msg_counts_[g][0]) / n);
    metrics_.add_series(t, Quantity::MsgRateDp3, static_cast<int>(g), static_cast<double>(msg_counts_[g][1]) / n);
    msg_counts_[g] = {0, 0};
  }
  const SimTime next = now + std::chrono::seconds(1);
  if (next <= config_.duration) engine_.schedule(next, EventKind::MetricsSample, [this] { on_metrics_sample(); });
}

void Simulation::on_tx_start(const Transmission& tx) {
  int slot = -1;
  if (tx.frame.profile == DataProfile::DP2) slot = 0;
  if (tx.frame.profile == DataProfile::DP3) slot = 1;
  if (slot < 0) return;
  const auto g = static_cast<std::size_t>(world_.group(tx.source));
  ++msg_counts_[g][static_cast<std::size_t>(slot)];
  if (static_cast<std::size_t>(all_group_) != g) ++msg_counts_[static_cast<std::size_t>(all_group_)][static_cast<std::size_t>(slot)];
}

void Simulation::on_tx_end(const Transmission& tx) {
  const VehicleId v = tx.source;
  Vehicle& ve = vehicles_[v];
  ve.gate.on_tx_complete(tx.end(), tx.duration);
  const bool reached = std::any_of(tx.receivers.begin(), tx.receivers.end(),
                                   [](const Receiver& r) { return r.delivered; });
  FrameCounters& c = metrics_.counters(v);
  if (reached) {
    ++c.delivered_any;
  } else {
    ++c.lost_all;
  }
  if (in_window(tx.start) && world_.in_roi(tx.position, config_.metrics.roi)) metrics_.log_transmission(tx);
  refill_background(v);
  pump(v);
}

void Simulation::enqueue(VehicleId v, const Frame& f) {
  FrameCounters& c = metrics_.counters(v);
  ++c.generated;
  if (!vehicles_[v].gate.enqueue(f)) ++c.dropped;
}

void Simulation::refill_background(VehicleId v) {
  if (auto f = background_poll(vehicles_[v].gate, v, engine_.now(), config_.traffic.background, next_frame_id_)) {
    ++next_frame_id_;
    enqueue(v, *f);
  }
}

void Simulation::pump(VehicleId v) {
  Vehicle& ve = vehicles_[v];
  if (ve.gate.busy() || medium_->holds_frame(v) || ve.gate.total_depth() == 0) return;
  const SimTime now = engine_.now();
  if (ve.gate.is_open(now)) {
    const std::optional<Frame> f = ve.gate.on_gate_open(now);
    medium_->submit(v, *f, access_category(f->profile));
    refill_background(v);
    return;
  }
  if (ve.gate.closed()) return;
  const SimTime t = ve.gate.t_go();
  if (ve.gate_event_at == t && engine_.is_pending(ve.gate_event)) return;
  if (engine_.is_pending(ve.gate_event)) engine_.cancel(ve.gate_event);
  ve.gate_event = engine_.schedule(t, EventKind::GateOpen, [this, v] { pump(v); }, v);
  ve.gate_event_at = t;
}

std::vector<FrameConservation> Simulation::conservation() const {
  std::vector<FrameConservation> out;
  out.reserve(vehicles_.size());
  for (VehicleId v = 0; v < vehicles_.size(); ++v) {
    FrameConservation fc;
    fc.vehicle = v;
    fc.counters = metrics_.all_counters()[v];
    fc.in_flight = vehicles_[v].gate.total_depth() + (medium_->holds_frame(v) ? 1 : 0);
    out.push_back(fc);
  }
  return out;
}

}  // namespace dcc
