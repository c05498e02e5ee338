#include <algorithm>
#include <cmath>
#include <vector>

#include "dcc/kernels.hpp"
#include "kernel_math.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace dcc::kernels {
bool openmp_enabled() {
#ifdef _OPENMP
  return true;
#else
  return false;
#endif
}

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

namespace omp {

void close_busy_windows(std::span<BusyTracker> trackers, std::int64_t window_end,
                        std::int64_t window_len, std::span<double> cbr_out) {
  const auto n = static_cast<std::int64_t>(trackers.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    cbr_out[static_cast<std::size_t>(i)] =
        detail::close_one(trackers[static_cast<std::size_t>(i)], window_end, window_len);
  }
}

void idm_accelerations(const IdmParams& params, const IdmInputs& in, std::span<double> accel_out) {
  const auto n = static_cast<std::int64_t>(accel_out.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    accel_out[k] = detail::idm_one(params, in.gap[k], in.speed[k], in.lead_speed[k], in.desired_speed[k]);
  }
}

void distance_histogram(std::span<const float> distance, std::span<const std::uint8_t> delivered,
                        double bin_width, std::span<std::uint64_t> potential,
                        std::span<std::uint64_t> delivered_out) {
  std::fill(potential.begin(), potential.end(), 0);
  std::fill(delivered_out.begin(), delivered_out.end(), 0);
  const std::size_t nbins = potential.size();
  const auto n = static_cast<std::int64_t>(distance.size());
#pragma omp parallel
  {
    // Integer counts: merge order does not affect the result.
    std::vector<std::uint64_t> pot(nbins, 0), del(nbins, 0);
#pragma omp for schedule(static) nowait
    for (std::int64_t i = 0; i < n; ++i) {
      const auto k = static_cast<std::size_t>(i);
      const auto bin = static_cast<std::size_t>(distance[k] / bin_width);
      if (bin >= nbins) continue;
      ++pot[bin];
      del[bin] += delivered[k] ? 1 : 0;
    }
#pragma omp critical
    for (std::size_t b = 0; b < nbins; ++b) {
      potential[b] += pot[b];
      delivered_out[b] += del[b];
    }
  }
}

}  // namespace omp
}  // namespace dcc::kernels
