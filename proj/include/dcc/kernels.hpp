#pragma once

// Data-parallel inner loops of the simulator. Every kernel exists twice: a
// plain serial loop (the reference) and an OpenMP version that must produce
// bit-identical output. Outputs are written per index, so thread scheduling
// cannot change results.

#include <cstdint>
#include <span>

namespace dcc::kernels {

enum class Policy { Serial, Parallel };

/// True when the OpenMP variants were compiled with OpenMP enabled.
bool openmp_enabled();
int max_threads();

/// Running union of busy intervals sensed by one vehicle, in microseconds.
/// Intervals must be added in non-decreasing start order.
struct BusyTracker {
  std::int64_t window_start = 0;
  std::int64_t acc = 0;  // closed busy time inside the current window
  std::int64_t busy_from = 0;
  std::int64_t busy_until = 0;  // end of the merged interval being built

  void add(std::int64_t start, std::int64_t end) {
    if (start > busy_until) {
      if (busy_until > window_start) acc += busy_until - std::max(busy_from, window_start);
      busy_from = start;
      busy_until = end;
    } else if (end > busy_until) {
      busy_until = end;
    }
  }

 private:
  static std::int64_t max(std::int64_t a, std::int64_t b) { return a > b ? a : b; }
};

struct IdmParams {
  double max_accel = 2.6;   // m/s^2
  double comfort_decel = 4.5;
  double min_gap = 2.5;     // m
  double headway = 1.0;     // s
  double max_decel = 9.0;   // physical braking limit
  bool operator==(const IdmParams&) const = default;
};

/// Inputs for one car-following step; all spans have the same length. A gap
/// of +infinity means a free road ahead.
struct IdmInputs {
  std::span<const double> gap;
  std::span<const double> speed;
  std::span<const double> lead_speed;
  std::span<const double> desired_speed;
};

namespace serial {

/// Closes the current window of every tracker at `window_end` and writes the
/// busy fraction of the `window_len` long window.
void close_busy_windows(std::span<BusyTracker> trackers, std::int64_t window_end,
                        std::int64_t window_len, std::span<double> cbr_out);

void idm_accelerations(const IdmParams& params, const IdmInputs& in, std::span<double> accel_out);

/// Per distance bin: how many (transmission, receiver) pairs fell in the bin
/// and how many of them were delivered. Distances beyond the last bin are ignored.
void distance_histogram(std::span<const float> distance, std::span<const std::uint8_t> delivered,
                        double bin_width, std::span<std::uint64_t> potential,
                        std::span<std::uint64_t> delivered_out);

}  // namespace serial

namespace omp {

void close_busy_windows(std::span<BusyTracker> trackers, std::int64_t window_end,
                        std::int64_t window_len, std::span<double> cbr_out);

void idm_accelerations(const IdmParams& params, const IdmInputs& in, std::span<double> accel_out);

void distance_histogram(std::span<const float> distance, std::span<const std::uint8_t> delivered,
                        double bin_width, std::span<std::uint64_t> potential,
                        std::span<std::uint64_t> delivered_out);

}  // namespace omp

inline void close_busy_windows(Policy p, std::span<BusyTracker> trackers, std::int64_t window_end,
                               std::int64_t window_len, std::span<double> cbr_out) {
  if (p == Policy::Parallel) {
    omp::close_busy_windows(trackers, window_end, window_len, cbr_out);
  } else {
    serial::close_busy_windows(trackers, window_end, window_len, cbr_out);
  }
}

inline void idm_accelerations(Policy p, const IdmParams& params, const IdmInputs& in,
                              std::span<double> accel_out) {
  if (p == Policy::Parallel) {
    omp::idm_accelerations(params, in, accel_out);
  } else {
    serial::idm_accelerations(params, in, accel_out);
  }
}

inline void distance_histogram(Policy p, std::span<const float> distance,
                               std::span<const std::uint8_t> delivered, double bin_width,
                               std::span<std::uint64_t> potential,
                               std::span<std::uint64_t> delivered_out) {
  if (p == Policy::Parallel) {
    omp::distance_histogram(distance, delivered, bin_width, potential, delivered_out);
  } else {
    serial::distance_histogram(distance, delivered, bin_width, potential, delivered_out);
  }
}

}  // namespace dcc::kernels
