#include "dcc/gatekeeper.hpp"

#include <algorithm>
#include <cmath>

namespace dcc {

Duration next_tx_wait(Duration t_on_pp, double delta) {
  if (t_on_pp <= Duration::zero()) throw InputError("next_tx_wait: t_on_pp must be positive");
  if (delta < 0) throw InputError("next_tx_wait: delta must be non-negative");
  if (delta == 0) return kGateClosed;
  const double wait_us = static_cast<double>(t_on_pp.count()) / delta;
  if (wait_us >= static_cast<double>(kMaxGateWait.count())) return kMaxGateWait;
  const Duration wait{static_cast<std::int64_t>(std::llround(wait_us))};
  return std::clamp(wait, kMinGateWait, kMaxGateWait);
}

Duration rate_cap_wait(double rate_per_s) {
  if (!(rate_per_s > 0)) return kGateClosed;
  const Duration wait = from_seconds(1.0 / rate_per_s);
  return std::clamp(wait, kMinGateWait, kMaxGateWait);
}

std::optional<std::size_t> Gatekeeper::enqueue(const Frame& frame) {
  if (frame.payload_bytes == 0) throw InputError("enqueue: frame has no payload");
  auto& q = queues_[index(frame.profile)];
  if (q.size() >= capacity_) {
    ++drops_[index(frame.profile)];
    return std::nullopt;
  }
  q.push_back(frame);
  return q.size();
}

bool Gatekeeper::is_open(SimTime now) const { return !busy_ && now >= t_go_; }

std::optional<Frame> Gatekeeper::on_gate_open(SimTime now) {
  if (!is_open(now)) return std::nullopt;
  for (auto& q : queues_) {
    if (q.empty()) continue;
    Frame f = q.front();
    q.pop_front();
    busy_ = true;
    return f;
  }
  return std::nullopt;
}

Duration Gatekeeper::wait_after(Duration t_on) const {
  switch (limit_.mode) {
    case GateLimit::Mode::Unlimited: return Duration::zero();
    case GateLimit::Mode::RateCap: return rate_cap_wait(limit_.value);
    case GateLimit::Mode::Share: return next_tx_wait(t_on, limit_.value);
  }
  return Duration::zero();
}

void Gatekeeper::on_tx_complete(SimTime tx_end, Duration t_on) {
  busy_ = false;
  has_sent_ = true;
  t_pg_ = tx_end;
  t_on_pp_ = t_on;
  const Duration wait = wait_after(t_on);
  t_go_ = wait == kGateClosed ? SimTime::max() : t_pg_ + wait;
}

void Gatekeeper::set_limit(const GateLimit& limit) {
  limit_ = limit;
  // Only a closed gate is re-armed; otherwise t_go keeps the value computed
  // when the last packet went out.
  if (closed()) {
    if (!has_sent_) {
      t_go_ = SimTime{0};
    } else {
      const Duration wait = wait_after(t_on_pp_);
      t_go_ = wait == kGateClosed ? SimTime::max() : t_pg_ + wait;
    }
  }
}

Duration Gatekeeper::facilities_feedback(Duration t_on_ref) const {
  switch (limit_.mode) {
    case GateLimit::Mode::Unlimited: return Duration::zero();
    case GateLimit::Mode::RateCap: return rate_cap_wait(limit_.value);
    case GateLimit::Mode::Share: return next_tx_wait(t_on_ref, limit_.value);
  }
  return Duration::zero();
}

std::size_t Gatekeeper::total_depth() const {
  std::size_t n = 0;
  for (const auto& q : queues_) n += q.size();
  return n;
}

}  // namespace dcc
