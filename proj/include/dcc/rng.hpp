#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace dcc {

/// Deterministic named random stream. The engine is std::mt19937_64, whose
/// output sequence is fixed by the standard; the floating-point transforms
/// are done here because std distributions are implementation-defined.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::string_view name, std::uint64_t index = 0);

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [lo, hi] (inclusive); throws InputError when hi < lo.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
  double normal(double mean, double stddev);

  std::uint64_t derived_seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

/// Mixes (seed, name, index) into a stream seed.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view name, std::uint64_t index);

}  // namespace dcc
