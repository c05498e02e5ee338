#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <queue>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace dcc {

/// Simulation clock: integer microseconds since start. Also used for durations.
using SimTime = std::chrono::microseconds;
using Duration = std::chrono::microseconds;

constexpr double to_seconds(Duration d) { return static_cast<double>(d.count()) * 1e-6; }
constexpr Duration from_seconds(double s) {
  return Duration{static_cast<std::int64_t>(s * 1e6 + (s >= 0 ? 0.5 : -0.5))};
}

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
/// Bad parameter or input value handed to an operation.
class InputError : public Error {
 public:
  using Error::Error;
};
/// Invalid configuration; `field()` names the offending key when known.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what)
      : Error(field.empty() ? what : field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};
class SchedulingError : public Error {
 public:
  using Error::Error;
};
/// An event handler failed; the message identifies the event.
class RuntimeFault : public Error {
 public:
  using Error::Error;
};

enum class EventKind : std::uint8_t {
  CbrWindowEnd,
  ControllerUpdate,
  GateOpen,
  TxStart,
  TxEnd,
  CamCheck,
  MobilityTick,
  MetricsSample,
  ScenarioPhase,
};

std::string_view to_string(EventKind kind);

using EventId = std::uint64_t;
inline constexpr std::uint32_t kNoSubject = 0xffffffffu;

struct Event {
  SimTime fire_at{0};
  std::uint64_t seq = 0;
  EventKind kind = EventKind::ScenarioPhase;
  std::uint32_t subject = kNoSubject;
};

/// Single-threaded discrete-event kernel. Events run in (fire_at, seq) order,
/// so simultaneous events execute in insertion order.
class Engine {
 public:
  using Handler = std::function<void()>;

  EventId schedule(SimTime fire_at, EventKind kind, Handler handler,
                   std::uint32_t subject = kNoSubject);
  /// Relative to the current clock.
  EventId schedule_in(Duration delay, EventKind kind, Handler handler,
                      std::uint32_t subject = kNoSubject) {
    return schedule(now_ + delay, kind, std::move(handler), subject);
  }

  bool cancel(EventId id);
  bool is_pending(EventId id) const { return pending_.count(id) != 0; }

  /// Executes every event with fire_at <= t_end, then sets the clock to t_end.
  std::size_t run_until(SimTime t_end);

  SimTime now() const { return now_; }
  std::uint64_t scheduled_count() const { return next_seq_; }
  std::uint64_t executed_count() const { return executed_; }
  std::uint64_t cancelled_count() const { return cancelled_; }
  std::size_t pending_count() const { return pending_.size(); }

 private:
  struct Slot {
    Event event;
    Handler handler;
  };
  struct Key {
    SimTime fire_at;
    std::uint64_t seq;
    bool operator>(const Key& o) const {
      return fire_at != o.fire_at ? fire_at > o.fire_at : seq > o.seq;
    }
  };

  SimTime now_{0};
  std::uint64_t next_seq_ = 0;
  std::uint64_t executed_ = 0;
  std::uint64_t cancelled_ = 0;
  std::priority_queue<Key, std::vector<Key>, std::greater<>> queue_;
  std::unordered_map<std::uint64_t, Slot> pending_;
};

}  // namespace dcc
