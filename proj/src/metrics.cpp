#include "dcc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <unordered_map>

namespace dcc {

std::string_view to_string(Quantity q) {
  switch (q) {
    case Quantity::Cbr: return "cbr";
    case Quantity::Delta: return "delta";
    case Quantity::MsgRateDp2: return "msg_rate_dp2";
    case Quantity::MsgRateDp3: return "msg_rate_dp3";
  }
  return "?";
}

Quantity parse_quantity(std::string_view name) {
  for (Quantity q : {Quantity::Cbr, Quantity::Delta, Quantity::MsgRateDp2, Quantity::MsgRateDp3}) {
    if (to_string(q) == name) return q;
  }
  throw InputError("unknown quantity '" + std::string(name) + "'");
}

MetricsStore::MetricsStore(std::vector<std::string> groups, std::vector<int> group_of,
                           std::vector<bool> sampled)
    : groups_(std::move(groups)),
      group_of_(std::move(group_of)),
      sampled_(std::move(sampled)),
      counters_(group_of_.size()) {
  if (sampled_.size() != group_of_.size()) throw InputError("metrics: sampled set size mismatch");
}

void MetricsStore::log_transmission(const Transmission& tx) {
  if (!sampled_[tx.source]) return;
  TxLogEntry e;
  e.source = tx.source;
  e.profile = tx.frame.profile;
  e.created_at = tx.frame.created_at;
  e.tx_start = tx.start;
  e.tx_end = tx.end();
  e.rx_begin = static_cast<std::uint32_t>(rx_.size());
  for (const Receiver& r : tx.receivers) {
    if (r.node == tx.source) continue;
    rx_.push_back({r.node, r.distance, r.delivered});
  }
  e.rx_end = static_cast<std::uint32_t>(rx_.size());
  tx_.push_back(e);
}

int MetricsStore::group_index(std::string_view name) const {
  for (std::size_t i = 0; i < groups_.size(); ++i) {
    if (groups_[i] == name) return static_cast<int>(i);
  }
  throw InputError("unknown group '" + std::string(name) + "'");
}

std::size_t MetricsStore::sampled_count() const {
  return static_cast<std::size_t>(std::count(sampled_.begin(), sampled_.end(), true));
}

std::vector<ReceptionRecord> MetricsStore::receptions() const {
  std::vector<ReceptionRecord> out;
  for (const TxLogEntry& t : tx_) {
    for (std::uint32_t i = t.rx_begin; i < t.rx_end; ++i) {
      const RxLogEntry& r = rx_[i];
      if (!r.delivered) continue;
      out.push_back({t.source, r.receiver, t.profile, t.created_at, t.tx_start, t.tx_end, r.distance});
    }
  }
  return out;
}

double nearest_rank(std::vector<double> values, double p) {
  if (values.empty()) throw InputError("nearest_rank: empty sample");
  if (!(p > 0 && p <= 100)) throw InputError("nearest_rank: p must be in (0, 100]");
  std::sort(values.begin(), values.end());
  const auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * static_cast<double>(values.size())));
  return values[std::max<std::size_t>(rank, 1) - 1];
}

std::vector<PdrBin> pdr_by_distance(const MetricsStore& store, double bin_width,
                                    DataProfile profile, kernels::Policy policy) {
  if (!(bin_width > 0)) throw InputError("pdr_by_distance: bin width must be positive");
  double max_d = 0.0;
  for (const RxLogEntry& r : store.rx_log()) max_d = std::max<double>(max_d, r.distance);
  const auto bins = static_cast<std::size_t>(std::floor(max_d / bin_width)) + 1;

  // Group receiver entries by sender so each sender gets its own histogram.
  std::map<VehicleId, std::pair<std::vector<float>, std::vector<std::uint8_t>>> by_sender;
  for (const TxLogEntry& t : store.tx_log()) {
    if (t.profile != profile) continue;
    auto& [dist, ok] = by_sender[t.source];
    for (std::uint32_t i = t.rx_begin; i < t.rx_end; ++i) {
      dist.push_back(store.rx_log()[i].distance);
      ok.push_back(store.rx_log()[i].delivered ? 1 : 0);
    }
  }

  std::vector<std::uint64_t> pot_total(bins, 0), del_total(bins, 0);
  std::vector<std::vector<double>> per_sender(bins);
  std::vector<std::uint64_t> pot(bins), del(bins);
  for (const auto& [sender, data] : by_sender) {
    std::fill(pot.begin(), pot.end(), 0);
    std::fill(del.begin(), del.end(), 0);
    kernels::distance_histogram(policy, data.first, data.second, bin_width, pot, del);
    for (std::size_t b = 0; b < bins; ++b) {
      pot_total[b] += pot[b];
      del_total[b] += del[b];
      if (pot[b] > 0) per_sender[b].push_back(static_cast<double>(del[b]) / static_cast<double>(pot[b]));
    }
  }

  std::vector<PdrBin> out;
  for (std::size_t b = 0; b < bins; ++b) {
    if (pot_total[b] == 0) continue;
    PdrBin bin;
    bin.lo = static_cast<double>(b) * bin_width;
    bin.hi = bin.lo + bin_width;
    bin.potential = pot_total[b];
    bin.pdr = static_cast<double>(del_total[b]) / static_cast<double>(pot_total[b]);
    const auto& s = per_sender[b];
    double half = 0.0;
    if (s.size() >= 2) {
      double mean = 0.0;
      for (double v : s) mean += v;
      mean /= static_cast<double>(s.size());
      double var = 0.0;
      for (double v : s) var += (v - mean) * (v - mean);
      var /= static_cast<double>(s.size() - 1);
      half = 1.96 * std::sqrt(var / static_cast<double>(s.size()));
    }
    bin.ci_lo = std::max(0.0, bin.pdr - half);
    bin.ci_hi = std::min(1.0, bin.pdr + half);
    out.push_back(bin);
  }
  return out;
}

std::vector<IpgBin> ipg_p95(const MetricsStore& store, double bin_width, DataProfile profile) {
  if (!(bin_width > 0)) throw InputError("ipg_p95: bin width must be positive");
  std::unordered_map<std::uint64_t, SimTime> last_rx;
  std::map<std::size_t, std::vector<double>> gaps;
  // The log is in transmission-end order, which is reception order.
  for (const TxLogEntry& t : store.tx_log()) {
    if (t.profile != profile) continue;
    for (std::uint32_t i = t.rx_begin; i < t.rx_end; ++i) {
      const RxLogEntry& r = store.rx_log()[i];
      if (!r.delivered) continue;
      const std::uint64_t key = (std::uint64_t{t.source} << 32) | r.receiver;
      auto [it, fresh] = last_rx.try_emplace(key, t.tx_end);
      if (!fresh) {
        const auto bin = static_cast<std::size_t>(std::floor(r.distance / bin_width));
        gaps[bin].push_back(to_seconds(t.tx_end - it->second));
        it->second = t.tx_end;
      }
    }
  }
  std::vector<IpgBin> out;
  for (auto& [bin, g] : gaps) {
    IpgBin b;
    b.lo = static_cast<double>(bin) * bin_width;
    b.hi = b.lo + bin_width;
    b.gaps = g.size();
    b.p95_s = nearest_rank(std::move(g), 95.0);
    out.push_back(b);
  }
  return out;
}

std::vector<DelayStat> e2e_delay(const MetricsStore& store) {
  std::map<DataProfile, std::vector<double>> delays;
  for (const TxLogEntry& t : store.tx_log()) {
    for (std::uint32_t i = t.rx_begin; i < t.rx_end; ++i) {
      if (store.rx_log()[i].delivered) delays[t.profile].push_back(to_seconds(t.tx_end - t.created_at));
    }
  }
  std::vector<DelayStat> out;
  for (auto& [profile, d] : delays) {
    DelayStat s;
    s.profile = profile;
    s.count = d.size();
    double sum = 0.0;
    for (double v : d) sum += v;
    s.mean_s = sum / static_cast<double>(d.size());
    s.p95_s = nearest_rank(std::move(d), 95.0);
    out.push_back(s);
  }
  return out;
}

std::vector<std::pair<double, double>> series(const MetricsStore& store, Quantity q,
                                              std::string_view group) {
  const int g = store.group_index(group);
  std::vector<std::pair<double, double>> out;
  for (const SeriesRow& r : store.series_rows()) {
    if (r.quantity == q && r.group == g) out.emplace_back(r.t_s, r.value);
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  return out;
}

double mean_cam_interval(const MetricsStore& store) {
  std::vector<SimTime> last(store.vehicle_count(), SimTime{-1});
  double sum = 0.0;
  std::size_t n = 0;
  for (const CamGeneration& c : store.cam_log()) {
    SimTime& prev = last[c.vehicle];
    if (prev >= SimTime::zero() && c.in_roi) {
      sum += to_seconds(c.t - prev);
      ++n;
    }
    prev = c.t;
  }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

namespace {

const char* profile_name(DataProfile p) {
  switch (p) {
    case DataProfile::DP0: return "DP0";
    case DataProfile::DP1: return "DP1";
    case DataProfile::DP2: return "DP2";
    case DataProfile::DP3: return "DP3";
  }
  return "?";
}

}  // namespace

void write_pdr_csv(std::ostream& os, const std::vector<PdrBin>& bins) {
  os << "bin_lo,bin_hi,pdr,ci_lo,ci_hi\n";
  for (const PdrBin& b : bins)
    os << b.lo << ',' << b.hi << ',' << b.pdr << ',' << b.ci_lo << ',' << b.ci_hi << '\n';
}

void write_ipg_csv(std::ostream& os, const std::vector<IpgBin>& bins) {
  os << "bin_lo,bin_hi,p95_s\n";
  for (const IpgBin& b : bins) os << b.lo << ',' << b.hi << ',' << b.p95_s << '\n';
}

void write_delay_csv(std::ostream& os, const std::vector<DelayStat>& stats) {
  os << "profile,mean_s,p95_s\n";
  for (const DelayStat& s : stats) os << profile_name(s.profile) << ',' << s.mean_s << ',' << s.p95_s << '\n';
}

void write_series_csv(std::ostream& os, const MetricsStore& store) {
  os << "t_s,quantity,group,value\n";
  for (const SeriesRow& r : store.series_rows()) {
    os << r.t_s << ',' << to_string(r.quantity) << ',' << store.groups()[static_cast<std::size_t>(r.group)]
       << ',' << r.value << '\n';
  }
}

}  // namespace dcc
