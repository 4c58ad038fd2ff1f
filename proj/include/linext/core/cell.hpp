#pragma once

#include <cmath>
#include <cstdint>
#include <functional>

#include "linext/core/types.hpp"

namespace linext {

/// Integer voxel coordinate.
struct Cell3 {
  std::int64_t i = 0;
  std::int64_t j = 0;
  std::int64_t k = 0;

  friend bool operator==(const Cell3&, const Cell3&) = default;
  friend auto operator<=>(const Cell3&, const Cell3&) = default;
};

struct Cell3Hash {
  std::size_t operator()(const Cell3& c) const noexcept {
    std::uint64_t h = static_cast<std::uint64_t>(c.i) * 0x9e3779b97f4a7c15ULL;
    h ^= static_cast<std::uint64_t>(c.j) * 0xc2b2ae3d27d4eb4fULL + (h << 6) + (h >> 2);
    h ^= static_cast<std::uint64_t>(c.k) * 0x165667b19e3779f9ULL + (h << 6) + (h >> 2);
    return static_cast<std::size_t>(h ^ (h >> 29));
  }
};

/// floor(p / edge) per axis.
inline Cell3 cell_of(Point3 p, double edge) {
  return {static_cast<std::int64_t>(std::floor(p.x / edge)),
          static_cast<std::int64_t>(std::floor(p.y / edge)),
          static_cast<std::int64_t>(std::floor(p.z / edge))};
}

}  // namespace linext
