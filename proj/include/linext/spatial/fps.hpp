#pragma once

#include <vector>

#include "linext/core/types.hpp"

namespace linext::spatial {

/// Greedy farthest point sampling. The first pick is `start`; each later pick
/// maximises the minimum distance to the points already picked, lowest index
/// winning ties. Indices are returned in pick order.
std::vector<std::size_t> fps(const PointCloud& cloud, std::size_t m, std::size_t start = 0);

}  // namespace linext::spatial
