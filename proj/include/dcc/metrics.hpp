#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "dcc/gatekeeper.hpp"
#include "dcc/kernels.hpp"
#include "dcc/medium.hpp"

namespace dcc {

/// One delivered (source, receiver) pair, as consumed by the aggregations.
struct ReceptionRecord {
  VehicleId source = 0;
  VehicleId receiver = 0;
  DataProfile profile = DataProfile::DP2;
  SimTime created_at{0};
  SimTime tx_start{0};
  SimTime rx_time{0};
  double distance = 0.0;
};

/// Transmission from a sampled sender, with every node that sensed it.
struct TxLogEntry {
  VehicleId source = 0;
  DataProfile profile = DataProfile::DP2;
  SimTime created_at{0};
  SimTime tx_start{0};
  SimTime tx_end{0};
  std::uint32_t rx_begin = 0;  // range into the receiver log
  std::uint32_t rx_end = 0;
};

struct RxLogEntry {
  VehicleId receiver = 0;
  float distance = 0.0f;
  bool delivered = false;
};

struct CamGeneration {
  VehicleId vehicle = 0;
  SimTime t{0};
  bool in_roi = false;
};

enum class Quantity { Cbr, Delta, MsgRateDp2, MsgRateDp3 };
std::string_view to_string(Quantity q);
Quantity parse_quantity(std::string_view name);

struct SeriesRow {
  double t_s = 0.0;
  Quantity quantity = Quantity::Cbr;
  int group = 0;
  double value = 0.0;
};

/// Per-vehicle frame accounting.
struct FrameCounters {
  std::uint64_t generated = 0;
  std::uint64_t dropped = 0;        // tail-dropped at the gatekeeper
  std::uint64_t delivered_any = 0;  // transmitted, reached at least one receiver
  std::uint64_t lost_all = 0;       // transmitted, reached nobody
};

/// Event logs of one run. Aggregations below are pure functions of it.
class MetricsStore {
 public:
  MetricsStore(std::vector<std::string> groups, std::vector<int> group_of,
               std::vector<bool> sampled);

  /// Appends the transmission if its source is sampled.
  void log_transmission(const Transmission& tx);
  void log_cam(VehicleId vehicle, SimTime t, bool in_roi) { cams_.push_back({vehicle, t, in_roi}); }
  void add_series(double t_s, Quantity q, int group, double value) {
    series_.push_back({t_s, q, group, value});
  }
  /// Moves every series timestamp by dt seconds.
  void shift_series(double dt) {
    for (SeriesRow& r : series_) r.t_s += dt;
  }
  FrameCounters& counters(VehicleId v) { return counters_[v]; }

  const std::vector<std::string>& groups() const { return groups_; }
  int group_index(std::string_view name) const;  // throws InputError for unknown groups
  const std::vector<int>& group_of() const { return group_of_; }
  bool sampled(VehicleId v) const { return sampled_[v]; }
  std::size_t sampled_count() const;
  std::size_t vehicle_count() const { return group_of_.size(); }
  const std::vector<TxLogEntry>& tx_log() const { return tx_; }
  const std::vector<RxLogEntry>& rx_log() const { return rx_; }
  const std::vector<CamGeneration>& cam_log() const { return cams_; }
  const std::vector<SeriesRow>& series_rows() const { return series_; }
  const std::vector<FrameCounters>& all_counters() const { return counters_; }

  /// Flattens the delivered pairs of the transmission log.
  std::vector<ReceptionRecord> receptions() const;

 private:
  std::vector<std::string> groups_;
  std::vector<int> group_of_;
  std::vector<bool> sampled_;
  std::vector<TxLogEntry> tx_;
  std::vector<RxLogEntry> rx_;
  std::vector<CamGeneration> cams_;
  std::vector<SeriesRow> series_;
  std::vector<FrameCounters> counters_;
};

struct PdrBin {
  double lo = 0.0;
  double hi = 0.0;
  double pdr = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  std::uint64_t potential = 0;
};

struct IpgBin {
  double lo = 0.0;
  double hi = 0.0;
  double p95_s = 0.0;
  std::size_t gaps = 0;
};

struct DelayStat {
  DataProfile profile = DataProfile::DP2;
  double mean_s = 0.0;
  double p95_s = 0.0;
  std::size_t count = 0;
};

/// Nearest-rank percentile (p in (0, 100]) of an unsorted sample.
double nearest_rank(std::vector<double> values, double p);

/// Delivered / potential receivers per distance bin for frames of `profile`;
/// the interval is a normal 95% band over per-sender PDRs. Empty bins are
/// omitted.
std::vector<PdrBin> pdr_by_distance(const MetricsStore& store, double bin_width,
                                    DataProfile profile = DataProfile::DP2,
                                    kernels::Policy policy = kernels::Policy::Serial);

/// 95th percentile of the gaps between consecutive receptions of each
/// (source, receiver) pair, pooled by the distance of the later reception.
std::vector<IpgBin> ipg_p95(const MetricsStore& store, double bin_width,
                            DataProfile profile = DataProfile::DP2);

/// Generation-to-reception delay of delivered frames, per profile present.
std::vector<DelayStat> e2e_delay(const MetricsStore& store);

/// Rows of one quantity for one group, in time order.
std::vector<std::pair<double, double>> series(const MetricsStore& store, Quantity q,
                                              std::string_view group);

/// Mean time between consecutive CAMs of the same vehicle, over intervals
/// whose later CAM was generated in the region of interest.
double mean_cam_interval(const MetricsStore& store);

void write_pdr_csv(std::ostream& os, const std::vector<PdrBin>& bins);
void write_ipg_csv(std::ostream& os, const std::vector<IpgBin>& bins);
void write_delay_csv(std::ostream& os, const std::vector<DelayStat>& stats);
void write_series_csv(std::ostream& os, const MetricsStore& store);

}  // namespace dcc
