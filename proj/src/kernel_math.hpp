#pragma once

// Per-element maths shared by the serial and OpenMP kernels.

#include <algorithm>
#include <cmath>

#include "dcc/kernels.hpp"

namespace dcc::kernels {
namespace detail {

inline double close_one(BusyTracker& t, std::int64_t window_end, std::int64_t window_len) {
  std::int64_t busy = t.acc;
  const std::int64_t from = std::max(t.busy_from, t.window_start);
  const std::int64_t until = std::min(t.busy_until, window_end);
  if (until > from) busy += until - from;
  t.acc = 0;
  t.window_start = window_end;
  const double cbr = static_cast<double>(busy) / static_cast<double>(window_len);
  return std::min(cbr, 1.0);
}

inline double idm_one(const IdmParams& p, double gap, double v, double v_lead, double v0) {
  const double free_term = v0 > 0 ? std::pow(v / v0, 4) : 1.0;
  double interaction = 0.0;
  if (std::isfinite(gap)) {
    const double dyn = v * p.headway + v * (v - v_lead) / (2.0 * std::sqrt(p.max_accel * p.comfort_decel));
    const double s_star = p.min_gap + std::max(0.0, dyn);
    const double s = std::max(gap, 0.1);
    interaction = (s_star / s) * (s_star / s);
  }
  const double a = p.max_accel * (1.0 - free_term - interaction);
  return std::clamp(a, -p.max_decel, p.max_accel);
}

}  // namespace detail
}  // namespace dcc::kernels
