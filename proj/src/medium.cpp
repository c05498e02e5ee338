#include "dcc/medium.hpp"

#include <algorithm>
#include <cmath>

namespace dcc {

void RadioParams::validate() const {
  if (!(data_rate_bps > 0)) throw ConfigError("radio.data_rate", "must be positive");
  if (phy_overhead <= Duration::zero()) throw ConfigError("radio.phy_overhead_us", "must be positive");
  if (!(sense_range_m > 0)) throw ConfigError("radio.sense_range", "must be positive");
  if (!(rx_range_m > 0 && rx_range_m <= sense_range_m))
    throw ConfigError("radio.rx_range", "must be positive and <= sense_range");
  if (slot <= Duration::zero()) throw ConfigError("radio.slot_us", "must be positive");
  if (sifs <= Duration::zero()) throw ConfigError("radio.sifs_us", "must be positive");
  for (int a : aifsn)
    if (a < 1) throw ConfigError("radio.aifsn", "must be >= 1");
  for (int c : cw_min)
    if (c < 0) throw ConfigError("radio.cw_min", "must be >= 0");
  if (!(rolloff_m > 0)) throw ConfigError("radio.rolloff", "must be positive");
}

Duration airtime(std::uint32_t payload_bytes, const RadioParams& params) {
  if (payload_bytes == 0) throw InputError("airtime: payload must be positive");
  const double payload_us = payload_bytes * 8.0 / params.data_rate_bps * 1e6;
  return params.phy_overhead + Duration{std::llround(payload_us)};
}

bool resolve_reception(const LedgerEntry& tx, VehicleId receiver, const Position& receiver_pos,
                       std::span<const LedgerEntry> ledger, const RadioParams& params,
                       const Topology& topology) {
  if (receiver == tx.source) return false;
  if (topology.distance(tx.position, receiver_pos) > params.rx_range_m) return false;
  const SimTime end = tx.start + tx.duration;
  for (const LedgerEntry& other : ledger) {
    if (other.id == tx.id) continue;
    const SimTime other_end = other.start + other.duration;
    if (!(other.start < end && other_end > tx.start)) continue;
    // The receiver's own transmission also blocks reception (half duplex).
    if (other.source == receiver ||
        topology.distance(other.position, receiver_pos) <= params.sense_range_m) {
      return false;
    }
  }
  return true;
}

double cbr_from_intervals(std::span<const std::pair<SimTime, SimTime>> intervals,
                          SimTime window_start, Duration window_len) {
  const SimTime window_end = window_start + window_len;
  std::vector<std::pair<SimTime, SimTime>> clipped;
  for (auto [s, e] : intervals) {
    s = std::max(s, window_start);
    e = std::min(e, window_end);
    if (e > s) clipped.emplace_back(s, e);
  }
  std::sort(clipped.begin(), clipped.end());
  Duration busy{0};
  SimTime cur_s{0}, cur_e{0};
  bool open = false;
  for (auto [s, e] : clipped) {
    if (!open || s > cur_e) {
      if (open) busy += cur_e - cur_s;
      cur_s = s;
      cur_e = e;
      open = true;
    } else {
      cur_e = std::max(cur_e, e);
    }
  }
  if (open) busy += cur_e - cur_s;
  return static_cast<double>(busy.count()) / static_cast<double>(window_len.count());
}

Medium::Medium(Engine& engine, const Topology& topology, RadioParams params, std::uint64_t seed)
    : engine_(engine),
      topology_(topology),
      params_(params),
      nodes_(topology.size()),
      busy_(topology.size()),
      reception_rng_(seed, "reception") {
  params_.validate();
  backoff_rng_.reserve(topology.size());
  for (std::size_t i = 0; i < topology.size(); ++i) backoff_rng_.emplace_back(seed, "backoff", i);
}

bool Medium::holds_frame(VehicleId node) const { return nodes_[node].phase != Phase::Idle; }

void Medium::submit(VehicleId source, const Frame& frame, AccessCategory ac) {
  Node& n = nodes_[source];
  if (n.phase != Phase::Idle) throw InputError("submit: MAC already holds a frame");
  n.frame = frame;
  n.ac = ac;
  n.backoff = static_cast<int>(
      backoff_rng_[source].uniform_int(0, params_.cw_min[static_cast<std::size_t>(ac)]));
  if (n.sensed == 0) {
    start_countdown(source, std::max(engine_.now(), n.idle_since + params_.aifs(ac)));
  } else {
    n.phase = Phase::Deferring;
  }
}

void Medium::start_countdown(VehicleId id, SimTime from) {
  Node& n = nodes_[id];
  n.phase = Phase::Counting;
  n.countdown_start = from;
  n.access_at = from + n.backoff * params_.slot;
  n.access_event =
      engine_.schedule(n.access_at, EventKind::TxStart, [this, id] { transmit(id); }, id);
}

void Medium::on_busy(VehicleId id) {
  Node& n = nodes_[id];
  // A node whose countdown expires in this very instant cannot sense the
  // competing start and transmits as well.
  if (n.phase != Phase::Counting || n.access_at <= engine_.now()) return;
  const Duration elapsed = engine_.now() - n.countdown_start;
  if (elapsed > Duration::zero()) {
    n.backoff = std::max(0, n.backoff - static_cast<int>(elapsed / params_.slot));
  }
  engine_.cancel(n.access_event);
  n.phase = Phase::Deferring;
}

void Medium::on_idle(VehicleId id) {
  Node& n = nodes_[id];
  n.idle_since = engine_.now();
  if (n.phase == Phase::Deferring) start_countdown(id, engine_.now() + params_.aifs(n.ac));
}

void Medium::transmit(VehicleId source) {
  Node& src = nodes_[source];
  src.phase = Phase::Transmitting;

  std::uint32_t slot;
  if (!free_slots_.empty()) {
    slot = free_slots_.back();
    free_slots_.pop_back();
  } else {
    slot = static_cast<std::uint32_t>(slots_.size());
    slots_.emplace_back();
  }
  Transmission& tx = slots_[slot];
  tx.id = next_tx_id_++;
  tx.source = source;
  tx.position = topology_.position(source);
  tx.start = engine_.now();
  tx.duration = airtime(src.frame.payload_bytes, params_);
  tx.frame = src.frame;
  tx.frame.tx_start = tx.start;
  tx.receivers.clear();
  ++tx_started_;
  ++live_;
  if (record_ledger_) ledger_.push_back({tx.id, source, tx.position, tx.start, tx.duration});

  scratch_.clear();
  topology_.within(tx.position, params_.sense_range_m, scratch_);
  const std::int64_t start_us = tx.start.count();
  const std::int64_t end_us = tx.end().count();
  for (VehicleId id : scratch_) {
    Node& n = nodes_[id];
    const auto index = static_cast<std::uint32_t>(tx.receivers.size());
    Receiver r;
    r.node = id;
    r.distance = static_cast<float>(id == source ? 0.0 : topology_.distance(tx.position, topology_.position(id)));
    if (!n.ongoing.empty()) {
      r.corrupted = true;
      for (const OngoingRef& o : n.ongoing) slots_[o.slot].receivers[o.index].corrupted = true;
    }
    tx.receivers.push_back(r);
    n.ongoing.push_back({slot, index});
    busy_[id].add(start_us, end_us);
    if (++n.sensed == 1 && id != source) on_busy(id);
  }

  if (tx_start_handler_) tx_start_handler_(tx);
  engine_.schedule(tx.end(), EventKind::TxEnd, [this, slot] { finish(slot); }, source);
}

bool Medium::draw_delivery(double distance) {
  if (params_.model == ReceptionModel::Binary) return distance <= params_.rx_range_m;
  if (distance > params_.sense_range_m) return false;
  const double p = 1.0 / (1.0 + std::exp((distance - params_.rx_range_m) / params_.rolloff_m));
  return reception_rng_.uniform() < p;
}

void Medium::finish(std::uint32_t slot) {
  Transmission& tx = slots_[slot];
  for (std::uint32_t i = 0; i < tx.receivers.size(); ++i) {
    Receiver& r = tx.receivers[i];
    Node& n = nodes_[r.node];
    auto it = std::find_if(n.ongoing.begin(), n.ongoing.end(),
                           [&](const OngoingRef& o) { return o.slot == slot && o.index == i; });
    n.ongoing.erase(it);
    r.delivered = r.node != tx.source && !r.corrupted && draw_delivery(r.distance);
  }
  Node& src = nodes_[tx.source];
  src.phase = Phase::Idle;
  for (const Receiver& r : tx.receivers) {
    Node& n = nodes_[r.node];
    if (--n.sensed == 0) on_idle(r.node);
  }
  ++tx_ended_;
  --live_;
  if (tx_end_handler_) tx_end_handler_(tx);
  free_slots_.push_back(slot);
}

void Medium::close_cbr_windows(SimTime window_end, std::span<double> cbr_out,
                               kernels::Policy policy) {
  // Window length is inferred from the first tracker (all share boundaries).
  const std::int64_t len = busy_.empty() ? 1 : window_end.count() - busy_.front().window_start;
  kernels::close_busy_windows(policy, busy_, window_end.count(), std::max<std::int64_t>(len, 1),
                              cbr_out);
}

}  // namespace dcc
