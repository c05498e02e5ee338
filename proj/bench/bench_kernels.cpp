// Serial reference vs OpenMP kernels. Arg(0) is the vehicle count.

#include <benchmark/benchmark.h>

#include <limits>
#include <vector>

#include "dcc/kernels.hpp"
#include "dcc/rng.hpp"

using namespace dcc;
using namespace dcc::kernels;

namespace {

std::vector<BusyTracker> trackers(std::size_t n) {
  RngStream rng(1, "bench-busy");
  std::vector<BusyTracker> t(n);
  for (auto& b : t) {
    std::int64_t s = 0;
    for (int k = 0; k < 40; ++k) {
      s += rng.uniform_int(0, 2000);
      b.add(s, s + 643);
    }
  }
  return t;
}

template <Policy P>
void BM_BusyWindows(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const std::vector<BusyTracker> base = trackers(n);
  std::vector<double> out(n);
  for (auto _ : state) {
    state.PauseTiming();
    std::vector<BusyTracker> t = base;
    state.ResumeTiming();
    close_busy_windows(P, t, 100000, 100000, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}

template <Policy P>
void BM_Idm(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  RngStream rng(2, "bench-idm");
  std::vector<double> gap(n), v(n), lead(n), v0(n), out(n);
  for (std::size_t i = 0; i < n; ++i) {
    gap[i] = i % 101 == 0 ? std::numeric_limits<double>::infinity() : rng.uniform(3, 150);
    v[i] = rng.uniform(0, 35);
    lead[i] = rng.uniform(0, 35);
    v0[i] = rng.uniform(20, 36);
  }
  const IdmParams p;
  for (auto _ : state) {
    idm_accelerations(P, p, {gap, v, lead, v0}, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}

template <Policy P>
void BM_Histogram(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0)) * 200;  // receptions per window
  RngStream rng(3, "bench-hist");
  std::vector<float> d(n);
  std::vector<std::uint8_t> ok(n);
  for (std::size_t i = 0; i < n; ++i) {
    d[i] = static_cast<float>(rng.uniform(0, 750));
    ok[i] = rng.uniform() < 0.8 ? 1 : 0;
  }
  std::vector<std::uint64_t> pot(16), del(16);
  for (auto _ : state) {
    distance_histogram(P, d, ok, 50.0, pot, del);
    benchmark::DoNotOptimize(pot.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}

}  // namespace

BENCHMARK_TEMPLATE(BM_BusyWindows, Policy::Serial)->Arg(310)->Arg(1860)->Arg(20000);
BENCHMARK_TEMPLATE(BM_BusyWindows, Policy::Parallel)->Arg(310)->Arg(1860)->Arg(20000);
BENCHMARK_TEMPLATE(BM_Idm, Policy::Serial)->Arg(310)->Arg(1860)->Arg(20000);
BENCHMARK_TEMPLATE(BM_Idm, Policy::Parallel)->Arg(310)->Arg(1860)->Arg(20000);
BENCHMARK_TEMPLATE(BM_Histogram, Policy::Serial)->Arg(310)->Arg(1860);
BENCHMARK_TEMPLATE(BM_Histogram, Policy::Parallel)->Arg(310)->Arg(1860);

BENCHMARK_MAIN();
