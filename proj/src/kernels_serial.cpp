#include <algorithm>
#include <cmath>
#include <limits>

#include "dcc/kernels.hpp"
#include "kernel_math.hpp"

namespace dcc::kernels {
namespace serial {

void close_busy_windows(std::span<BusyTracker> trackers, std::int64_t window_end,
                        std::int64_t window_len, std::span<double> cbr_out) {
  for (std::size_t i = 0; i < trackers.size(); ++i) {
    cbr_out[i] = detail::close_one(trackers[i], window_end, window_len);
  }
}

void idm_accelerations(const IdmParams& params, const IdmInputs& in, std::span<double> accel_out) {
  for (std::size_t i = 0; i < accel_out.size(); ++i) {
    accel_out[i] = detail::idm_one(params, in.gap[i], in.speed[i], in.lead_speed[i], in.desired_speed[i]);
  }
}

void distance_histogram(std::span<const float> distance, std::span<const std::uint8_t> delivered,
                        double bin_width, std::span<std::uint64_t> potential,
                        std::span<std::uint64_t> delivered_out) {
  std::fill(potential.begin(), potential.end(), 0);
  std::fill(delivered_out.begin(), delivered_out.end(), 0);
  const std::size_t nbins = potential.size();
  for (std::size_t i = 0; i < distance.size(); ++i) {
    const auto bin = static_cast<std::size_t>(distance[i] / bin_width);
    if (bin >= nbins) continue;
    ++potential[bin];
    delivered_out[bin] += delivered[i] ? 1 : 0;
  }
}

}  // namespace serial
}  // namespace dcc::kernels
