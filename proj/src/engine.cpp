#include "dcc/engine.hpp"

#include <sstream>

namespace dcc {

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::CbrWindowEnd: return "CbrWindowEnd";
    case EventKind::ControllerUpdate: return "ControllerUpdate";
    case EventKind::GateOpen: return "GateOpen";
    case EventKind::TxStart: return "TxStart";
    case EventKind::TxEnd: return "TxEnd";
    case EventKind::CamCheck: return "CamCheck";
    case EventKind::MobilityTick: return "MobilityTick";
    case EventKind::MetricsSample: return "MetricsSample";
    case EventKind::ScenarioPhase: return "ScenarioPhase";
  }
  return "Unknown";
}

EventId Engine::schedule(SimTime fire_at, EventKind kind, Handler handler,
                         std::uint32_t subject) {
  if (fire_at < now_) {
    std::ostringstream msg;
    msg << "cannot schedule " << to_string(kind) << " at " << fire_at.count()
        << " us: clock is already at " << now_.count() << " us";
    throw SchedulingError(msg.str());
  }
  const std::uint64_t seq = next_seq_++;
  pending_.emplace(seq, Slot{Event{fire_at, seq, kind, subject}, std::move(handler)});
  queue_.push(Key{fire_at, seq});
  return seq;
}

bool Engine::cancel(EventId id) {
  if (pending_.erase(id) == 0) return false;
  ++cancelled_;
  return true;
}

std::size_t Engine::run_until(SimTime t_end) {
  if (t_end < now_) throw SchedulingError("run_until: end time is in the past");
  std::size_t count = 0;
  while (!queue_.empty() && queue_.top().fire_at <= t_end) {
    const Key key = queue_.top();
    queue_.pop();
    auto it = pending_.find(key.seq);
    if (it == pending_.end()) continue;  // cancelled
    Slot slot = std::move(it->second);
    pending_.erase(it);
    now_ = key.fire_at;
    ++executed_;
    ++count;
    try {
      slot.handler();
    } catch (const std::exception& e) {
      std::ostringstream msg;
      msg << "event " << to_string(slot.event.kind) << " #" << slot.event.seq << " at "
          << slot.event.fire_at.count() << " us";
      if (slot.event.subject != kNoSubject) msg << " (vehicle " << slot.event.subject << ")";
      msg << " failed: " << e.what();
      throw RuntimeFault(msg.str());
    }
  }
  now_ = t_end;
  return count;
}

}  // namespace dcc
