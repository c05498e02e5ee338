#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "dcc/kernels.hpp"
#include "dcc/medium.hpp"
#include "dcc/rng.hpp"

using namespace dcc;
using namespace dcc::kernels;

TEST_CASE("busy tracker against the interval union") {
  RngStream rng(3, "tracker");
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::pair<SimTime, SimTime>> iv;
    std::int64_t start = 0;
    for (int k = 0; k < 40; ++k) {
      start += rng.uniform_int(0, 3000);
      iv.emplace_back(SimTime{start}, SimTime{start + rng.uniform_int(100, 2000)});
    }
    // Intervals are added as they start; 10 ms windows close in between.
    std::vector<BusyTracker> one(1);
    std::vector<double> out(1);
    std::size_t next = 0;
    for (std::int64_t w = 10000; w <= 150000; w += 10000) {
      while (next < iv.size() && iv[next].first.count() < w) {
        one[0].add(iv[next].first.count(), iv[next].second.count());
        ++next;
      }
      serial::close_busy_windows(one, w, 10000, out);
      const double ref = cbr_from_intervals(iv, SimTime{w - 10000}, Duration{10000});
      CHECK(out[0] == doctest::Approx(ref).epsilon(1e-12));
    }
  }
}

TEST_CASE("serial and OpenMP kernels agree bit for bit") {
  RngStream rng(17, "kernels");
  const std::size_t n = 5000;

  std::vector<BusyTracker> a(n);
  for (auto& t : a) {
    std::int64_t s = 0;
    for (int k = 0; k < 20; ++k) {
      s += rng.uniform_int(0, 9000);
      t.add(s, s + rng.uniform_int(100, 1000));
    }
  }
  std::vector<BusyTracker> b = a;
  std::vector<double> ca(n), cb(n);
  serial::close_busy_windows(a, 100000, 100000, ca);
  omp::close_busy_windows(b, 100000, 100000, cb);
  CHECK(ca == cb);
  for (std::size_t i = 0; i < n; ++i) CHECK(a[i].window_start == b[i].window_start);

  std::vector<double> gap(n), v(n), lead(n), v0(n), oa(n), ob(n);
  for (std::size_t i = 0; i < n; ++i) {
    gap[i] = i % 97 == 0 ? std::numeric_limits<double>::infinity() : rng.uniform(0.5, 200);
    v[i] = rng.uniform(0, 35);
    lead[i] = rng.uniform(0, 35);
    v0[i] = rng.uniform(20, 36);
  }
  const IdmParams p;
  serial::idm_accelerations(p, {gap, v, lead, v0}, oa);
  omp::idm_accelerations(p, {gap, v, lead, v0}, ob);
  CHECK(oa == ob);

  std::vector<float> dist(n);
  std::vector<std::uint8_t> ok(n);
  for (std::size_t i = 0; i < n; ++i) {
    dist[i] = static_cast<float>(rng.uniform(0, 800));
    ok[i] = rng.uniform() < 0.7 ? 1 : 0;
  }
  std::vector<std::uint64_t> pa(16), da(16), pb(16), db(16);
  serial::distance_histogram(dist, ok, 50.0, pa, da);
  omp::distance_histogram(dist, ok, 50.0, pb, db);
  CHECK(pa == pb);
  CHECK(da == db);
  std::uint64_t total = 0;
  for (auto x : pa) total += x;
  CHECK(total == n);
}

TEST_CASE("distance histogram ignores distances beyond the last bin") {
  const std::vector<float> d{10.f, 60.f, 990.f};
  const std::vector<std::uint8_t> ok{1, 0, 1};
  std::vector<std::uint64_t> pot(2), del(2);
  serial::distance_histogram(d, ok, 50.0, pot, del);
  CHECK(pot == std::vector<std::uint64_t>{1, 1});
  CHECK(del == std::vector<std::uint64_t>{1, 0});
}

TEST_CASE("thread count is reported") {
  CHECK(max_threads() >= 1);
  if (!openmp_enabled()) CHECK(max_threads() == 1);
}
