#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "linext/core/types.hpp"

namespace linext::spatial {

enum class Curve { Z, Hilbert, Random };

std::string to_string(Curve c);
/// Accepts "z", "hilbert", "random" (case-insensitive).
Curve parse_curve(const std::string& name);

struct SerialCode {
  Curve curve = Curve::Z;  // the curve actually used; never Random
  unsigned bits = 10;
  std::vector<std::uint64_t> codes;
  std::vector<std::size_t> order;  // sorts codes ascending, ties by index

  /// rank[i] = position of point i in `order`.
  std::vector<std::size_t> ranks() const;
};

/// Quantises each axis of `bounds` into 2^bits cells (points outside clamp to
/// the boundary cells) and encodes with the requested curve. Random picks Z or
/// Hilbert with equal probability from `seed`.
SerialCode serialize(const PointCloud& cloud, Curve curve, unsigned bits, const Bounds& bounds,
                     std::uint64_t seed);

/// Bounding box of `cloud` with every flat axis widened to one unit, so it
/// moves with the cloud and is never degenerate.
Bounds serial_bounds(const PointCloud& cloud);

}  // namespace linext::spatial
