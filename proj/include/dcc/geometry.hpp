#pragma once

#include <cstdint>
#include <vector>

namespace dcc {

struct Position {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Position&) const = default;
};

/// Radio-facing view of the vehicle population. Implemented by the mobility
/// world; the medium only needs positions, the distance metric and a range
/// query.
class Topology {
 public:
  virtual ~Topology() = default;
  virtual std::size_t size() const = 0;
  virtual Position position(std::uint32_t id) const = 0;
  virtual double distance(const Position& a, const Position& b) const = 0;
  /// Appends to `out` every vehicle within `range` of `p`. The order must be a
  /// deterministic function of the current positions.
  virtual void within(const Position& p, double range, std::vector<std::uint32_t>& out) const = 0;
};

}  // namespace dcc
