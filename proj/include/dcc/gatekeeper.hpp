#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <optional>

#include "dcc/controllers.hpp"
#include "dcc/engine.hpp"

namespace dcc {

using VehicleId = std::uint32_t;

/// Facilities-layer priority class; DP0 is the most urgent.
enum class DataProfile : std::uint8_t { DP0 = 0, DP1 = 1, DP2 = 2, DP3 = 3 };
inline constexpr std::size_t kNumProfiles = 4;

/// EDCA access categories in the order DP0..DP3 map onto them.
enum class AccessCategory : std::uint8_t { Voice = 0, Video = 1, BestEffort = 2, Background = 3 };

constexpr AccessCategory access_category(DataProfile dp) {
  return static_cast<AccessCategory>(static_cast<std::uint8_t>(dp));
}

struct Frame {
  std::uint64_t id = 0;
  VehicleId source = 0;
  DataProfile profile = DataProfile::DP2;
  std::uint32_t payload_bytes = 400;
  SimTime created_at{0};
  SimTime tx_start{-1};
};

/// Sentinel returned while the allowance is zero.
inline constexpr Duration kGateClosed = Duration::max();
inline constexpr Duration kMinGateWait = std::chrono::milliseconds(25);
inline constexpr Duration kMaxGateWait = std::chrono::seconds(1);

/// Waiting time after the end of a transmission of duration `t_on_pp` before
/// the next one may start: t_on_pp / delta clamped to [25 ms, 1 s].
Duration next_tx_wait(Duration t_on_pp, double delta);

/// Same clamp for a message-rate cap (reactive controller).
Duration rate_cap_wait(double rate_per_s);

/// Per-vehicle access-layer flow control: one FIFO per data profile feeding a
/// single rate gate.
class Gatekeeper {
 public:
  explicit Gatekeeper(std::size_t queue_capacity = 2) : capacity_(queue_capacity) {}

  /// Appends to the profile's queue. Returns the new depth, or nullopt when the
  /// queue was full and the frame was tail-dropped.
  std::optional<std::size_t> enqueue(const Frame& frame);

  /// True when a frame may be handed to the MAC at `now`.
  bool is_open(SimTime now) const;
  /// Dequeues the head of the highest-priority non-empty queue if the gate is
  /// open. The gate then stays busy until on_tx_complete.
  std::optional<Frame> on_gate_open(SimTime now);
  /// Records the end of the vehicle's own transmission and re-arms t_go.
  void on_tx_complete(SimTime tx_end, Duration t_on);
  /// The MAC gave up on the frame without transmitting.
  void on_tx_abandoned() { busy_ = false; }

  /// New controller output. A zero allowance closes the gate until this is
  /// called again with a positive value.
  void set_limit(const GateLimit& limit);
  const GateLimit& limit() const { return limit_; }

  /// Minimum CAM generation interval handed up to the facilities layer.
  Duration facilities_feedback(Duration t_on_ref) const;

  std::size_t depth(DataProfile dp) const { return queues_[index(dp)].size(); }
  std::size_t total_depth() const;
  std::uint64_t drops(DataProfile dp) const { return drops_[index(dp)]; }
  bool busy() const { return busy_; }
  bool closed() const { return t_go_ == SimTime::max(); }
  SimTime t_go() const { return t_go_; }
  SimTime t_pg() const { return t_pg_; }
  Duration t_on_pp() const { return t_on_pp_; }

 private:
  static std::size_t index(DataProfile dp) { return static_cast<std::size_t>(dp); }
  Duration wait_after(Duration t_on) const;

  std::size_t capacity_;
  std::array<std::deque<Frame>, kNumProfiles> queues_;
  std::array<std::uint64_t, kNumProfiles> drops_{};
  GateLimit limit_ = GateLimit::unlimited();
  SimTime t_pg_{0};
  Duration t_on_pp_{0};
  SimTime t_go_{0};
  bool has_sent_ = false;
  bool busy_ = false;
};

}  // namespace dcc
