#include <doctest.h>

#include <sstream>

#include "dcc/metrics.hpp"

using namespace dcc;
using namespace std::chrono_literals;

namespace {

Transmission tx(VehicleId src, SimTime start, DataProfile dp,
                std::vector<std::pair<VehicleId, std::pair<float, bool>>> rx,
                SimTime created = SimTime{-1}) {
  Transmission t;
  t.source = src;
  t.start = start;
  t.duration = Duration{643};
  t.frame.profile = dp;
  t.frame.created_at = created.count() < 0 ? start : created;
  t.receivers.push_back({src, 0.0f, false, false});
  for (const auto& [node, dr] : rx) t.receivers.push_back({node, dr.first, false, dr.second});
  return t;
}

MetricsStore store(std::size_t n, std::vector<bool> sampled = {}) {
  if (sampled.empty()) sampled.assign(n, true);
  return MetricsStore({"all"}, std::vector<int>(n, 0), sampled);
}

}  // namespace

TEST_CASE("nearest rank percentile") {
  CHECK(nearest_rank({1, 2, 3, 4, 5, 6, 7, 8, 9, 10}, 95) == 10);
  CHECK(nearest_rank({1, 2, 3, 4, 5, 6, 7, 8, 9, 10}, 50) == 5);
  CHECK(nearest_rank({3}, 1) == 3);
  CHECK_THROWS_AS(nearest_rank({}, 95), InputError);
  CHECK_THROWS_AS(nearest_rank({1}, 0), InputError);
}

TEST_CASE("pdr by distance bins") {
  MetricsStore m = store(4);
  m.log_transmission(tx(0, SimTime{0}, DataProfile::DP2, {{1, {10.f, true}}, {2, {60.f, false}}, {3, {70.f, true}}}));
  m.log_transmission(tx(1, SimTime{1000}, DataProfile::DP2, {{0, {10.f, true}}, {2, {45.f, true}}}));
  m.log_transmission(tx(1, SimTime{2000}, DataProfile::DP3, {{0, {10.f, false}}}));
  const auto bins = pdr_by_distance(m, 50.0);
  REQUIRE(bins.size() == 2);
  CHECK(bins[0].lo == 0);
  CHECK(bins[0].potential == 3);
  CHECK(bins[0].pdr == doctest::Approx(1.0));
  CHECK(bins[1].lo == 50);
  CHECK(bins[1].pdr == doctest::Approx(0.5));
  // one sender in the far bin: no spread, interval collapses
  CHECK(bins[1].ci_lo == doctest::Approx(0.5));
  CHECK(bins[1].ci_hi == doctest::Approx(0.5));
  const auto dp3 = pdr_by_distance(m, 50.0, DataProfile::DP3);
  REQUIRE(dp3.size() == 1);
  CHECK(dp3[0].pdr == 0.0);
}

TEST_CASE("pdr confidence band from per-sender spread") {
  MetricsStore m = store(5);
  // Per-sender PDRs {1, 0.5, 0.5} within the first bin; pooled PDR 3/5.
  m.log_transmission(tx(0, SimTime{0}, DataProfile::DP2, {{3, {10.f, true}}}));
  m.log_transmission(tx(1, SimTime{0}, DataProfile::DP2, {{3, {10.f, true}}, {4, {20.f, false}}}));
  m.log_transmission(tx(2, SimTime{0}, DataProfile::DP2, {{3, {10.f, false}}, {4, {20.f, true}}}));
  const auto bins = pdr_by_distance(m, 50.0);
  REQUIRE(bins.size() == 1);
  CHECK(bins[0].pdr == doctest::Approx(0.6));
  // sd of {1, .5, .5} = 0.288675; half width = 1.96 * 0.288675 / sqrt(3) = 0.326667
  CHECK(bins[0].ci_lo == doctest::Approx(0.6 - 0.326667).epsilon(1e-4));
  CHECK(bins[0].ci_hi == doctest::Approx(0.6 + 0.326667).epsilon(1e-4));

  MetricsStore wide = store(3);
  wide.log_transmission(tx(0, SimTime{0}, DataProfile::DP2, {{2, {10.f, true}}}));
  wide.log_transmission(tx(1, SimTime{0}, DataProfile::DP2, {{2, {10.f, false}}}));
  const auto clipped = pdr_by_distance(wide, 50.0);
  CHECK(clipped[0].ci_lo == 0.0);
  CHECK(clipped[0].ci_hi == 1.0);
}

TEST_CASE("inter-packet gap: alternate losses from a 10 Hz stream") {
  MetricsStore m = store(2);
  for (int k = 0; k < 100; ++k) {
    m.log_transmission(tx(0, SimTime{k * 100000}, DataProfile::DP2, {{1, {100.f, k % 2 == 0}}}));
  }
  const auto ipg = ipg_p95(m, 50.0);
  REQUIRE(ipg.size() == 1);
  CHECK(ipg[0].lo == 100.0);
  CHECK(ipg[0].p95_s == doctest::Approx(0.2));
  CHECK(ipg[0].gaps == 49);
}

TEST_CASE("end-to-end delay per profile") {
  MetricsStore m = store(2);
  m.log_transmission(tx(0, SimTime{10000}, DataProfile::DP2, {{1, {10.f, true}}}, SimTime{9000}));
  m.log_transmission(tx(0, SimTime{20000}, DataProfile::DP2, {{1, {10.f, true}}}, SimTime{19357}));
  m.log_transmission(tx(0, SimTime{30000}, DataProfile::DP2, {{1, {10.f, false}}}, SimTime{0}));
  const auto d = e2e_delay(m);
  REQUIRE(d.size() == 1);
  CHECK(d[0].count == 2);
  // delays: 1000 + 643 us and 643 + 643 us
  CHECK(d[0].mean_s == doctest::Approx((1643 + 1286) / 2.0 * 1e-6));
  CHECK(d[0].p95_s == doctest::Approx(1643e-6));
}

TEST_CASE("only sampled senders are logged") {
  MetricsStore m = store(3, {true, false, true});
  m.log_transmission(tx(1, SimTime{0}, DataProfile::DP2, {{0, {10.f, true}}}));
  CHECK(m.tx_log().empty());
  m.log_transmission(tx(0, SimTime{0}, DataProfile::DP2, {{1, {10.f, true}}}));
  CHECK(m.tx_log().size() == 1);
  CHECK(m.sampled_count() == 2);
  const auto rec = m.receptions();
  REQUIRE(rec.size() == 1);
  CHECK(rec[0].receiver == 1);
}

TEST_CASE("cam interval over the region of interest") {
  MetricsStore m = store(2);
  m.log_cam(0, SimTime{0}, true);
  m.log_cam(1, SimTime{0}, true);
  m.log_cam(0, SimTime{100000}, true);
  m.log_cam(1, SimTime{300000}, false);
  m.log_cam(0, SimTime{400000}, true);
  CHECK(mean_cam_interval(m) == doctest::Approx(0.2));
}

TEST_CASE("series rows and csv layout") {
  MetricsStore m({"large", "small"}, {0, 1}, {true, true});
  m.add_series(1.0, Quantity::Cbr, 1, 0.5);
  m.add_series(0.5, Quantity::Cbr, 1, 0.4);
  m.add_series(0.5, Quantity::Delta, 0, 0.01);
  const auto s = series(m, Quantity::Cbr, "small");
  REQUIRE(s.size() == 2);
  CHECK(s[0].first == 0.5);
  CHECK_THROWS_AS(series(m, Quantity::Cbr, "medium"), InputError);
  m.shift_series(-0.5);
  CHECK(series(m, Quantity::Cbr, "small")[0].first == 0.0);

  std::ostringstream os;
  write_series_csv(os, m);
  CHECK(os.str().rfind("t_s,quantity,group,value\n", 0) == 0);
  CHECK(os.str().find("delta,large") != std::string::npos);
  std::ostringstream p;
  write_pdr_csv(p, {});
  CHECK(p.str() == "bin_lo,bin_hi,pdr,ci_lo,ci_hi\n");
  std::ostringstream i;
  write_ipg_csv(i, {});
  CHECK(i.str() == "bin_lo,bin_hi,p95_s\n");
  std::ostringstream d;
  write_delay_csv(d, {{DataProfile::DP3, 0.1, 0.2, 3}});
  CHECK(d.str() == "profile,mean_s,p95_s\nDP3,0.1,0.2\n");
  CHECK(parse_quantity("msg_rate_dp3") == Quantity::MsgRateDp3);
  CHECK_THROWS_AS(parse_quantity("x"), InputError);
}
