#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "dcc/engine.hpp"
#include "dcc/gatekeeper.hpp"
#include "dcc/geometry.hpp"
#include "dcc/kernels.hpp"
#include "dcc/rng.hpp"

namespace dcc {

enum class ReceptionModel { Binary, Probabilistic };

/// Radio and EDCA parameters. Defaults: 6 Mbit/s, 750 m carrier sense,
/// 802.11p 10 MHz timing (13 us slot, 32 us SIFS).
struct RadioParams {
  double data_rate_bps = 6e6;
  Duration phy_overhead{110};
  double sense_range_m = 750.0;
  double rx_range_m = 500.0;
  Duration slot{13};
  Duration sifs{32};
  std::array<int, 4> aifsn{2, 3, 6, 9};     // VO, VI, BE, BK
  std::array<int, 4> cw_min{3, 7, 15, 15};  // VO, VI, BE, BK
  ReceptionModel model = ReceptionModel::Binary;
  /// Width of the logistic roll-off around rx_range for the probabilistic model.
  double rolloff_m = 50.0;

  Duration aifs(AccessCategory ac) const {
    return sifs + aifsn[static_cast<std::size_t>(ac)] * slot;
  }
  void validate() const;
  bool operator==(const RadioParams&) const = default;
};

/// Frame duration on air: PHY overhead plus payload at the data rate, rounded
/// to the microsecond clock.
Duration airtime(std::uint32_t payload_bytes, const RadioParams& params);

/// Sensing / reception bookkeeping for one node that was in carrier-sense
/// range of a transmission when it started.
struct Receiver {
  VehicleId node = 0;
  float distance = 0.0f;
  bool corrupted = false;  // another sensed transmission overlapped in time
  bool delivered = false;  // final outcome, filled at TxEnd
};

struct Transmission {
  std::uint64_t id = 0;
  VehicleId source = 0;
  Position position;
  SimTime start{0};
  Duration duration{0};
  Frame frame;
  std::vector<Receiver> receivers;  // includes the source itself

  SimTime end() const { return start + duration; }
};

/// Minimal transmission ledger entry used by the reference reception check.
struct LedgerEntry {
  std::uint64_t id = 0;
  VehicleId source = 0;
  Position position;
  SimTime start{0};
  Duration duration{0};
};

/// Reference reception rule: delivered iff within rx_range and no other
/// ledger entry whose source is within sense_range of the receiver overlaps
/// the transmission in time. Used as an oracle for the incremental tracker.
bool resolve_reception(const LedgerEntry& tx, VehicleId receiver, const Position& receiver_pos,
                       std::span<const LedgerEntry> ledger, const RadioParams& params,
                       const Topology& topology);

/// Busy fraction of [window_start, window_start + window_len) covered by the
/// union of `intervals` (start, end pairs). Reference for the tracker.
double cbr_from_intervals(std::span<const std::pair<SimTime, SimTime>> intervals,
                          SimTime window_start, Duration window_len);

/// Shared channel: CSMA/CA with per-AC AIFS and a single backoff stage,
/// range-based reception with collisions, and busy-time tracking per node.
class Medium {
 public:
  using TxEndHandler = std::function<void(const Transmission&)>;
  using TxStartHandler = std::function<void(const Transmission&)>;

  Medium(Engine& engine, const Topology& topology, RadioParams params, std::uint64_t seed);

  void on_tx_end(TxEndHandler h) { tx_end_handler_ = std::move(h); }
  void on_tx_start(TxStartHandler h) { tx_start_handler_ = std::move(h); }
  /// Keep LedgerEntry copies of every transmission (testing aid).
  void record_ledger(bool on) { record_ledger_ = on; }
  const std::vector<LedgerEntry>& ledger() const { return ledger_; }

  /// Hands one frame to the node's MAC. The node must not already hold one.
  void submit(VehicleId source, const Frame& frame, AccessCategory ac);
  bool holds_frame(VehicleId node) const;

  /// Closes the CBR window ending at `window_end` for every node.
  void close_cbr_windows(SimTime window_end, std::span<double> cbr_out,
                         kernels::Policy policy = kernels::Policy::Serial);

  const RadioParams& params() const { return params_; }
  std::size_t sensed_count(VehicleId node) const { return nodes_[node].sensed; }
  std::uint64_t tx_started() const { return tx_started_; }
  std::uint64_t tx_ended() const { return tx_ended_; }
  std::size_t ongoing() const { return live_; }

 private:
  enum class Phase : std::uint8_t { Idle, Deferring, Counting, Transmitting };
  struct OngoingRef {
    std::uint32_t slot;
    std::uint32_t index;
  };
  struct Node {
    Phase phase = Phase::Idle;
    Frame frame;
    AccessCategory ac = AccessCategory::BestEffort;
    int backoff = 0;
    SimTime idle_since{0};
    SimTime countdown_start{0};
    SimTime access_at{0};
    EventId access_event = 0;
    std::uint32_t sensed = 0;
    std::vector<OngoingRef> ongoing;
  };

  void start_countdown(VehicleId id, SimTime from);
  void on_busy(VehicleId id);
  void on_idle(VehicleId id);
  void transmit(VehicleId source);
  void finish(std::uint32_t slot);
  bool draw_delivery(double distance);

  Engine& engine_;
  const Topology& topology_;
  RadioParams params_;
  std::vector<Node> nodes_;
  std::vector<kernels::BusyTracker> busy_;
  std::vector<RngStream> backoff_rng_;
  RngStream reception_rng_;
  std::vector<Transmission> slots_;
  std::vector<std::uint32_t> free_slots_;
  std::vector<std::uint32_t> scratch_;
  std::vector<LedgerEntry> ledger_;
  TxEndHandler tx_end_handler_;
  TxStartHandler tx_start_handler_;
  bool record_ledger_ = false;
  std::uint64_t next_tx_id_ = 0;
  std::uint64_t tx_started_ = 0;
  std::uint64_t tx_ended_ = 0;
  std::size_t live_ = 0;
};

}  // namespace dcc
