#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "linext/core/types.hpp"

namespace linext::dsr {

/// Distance-stratified replication plan over four range quartiles.
struct DsrPlan {
  std::vector<std::size_t> order;                            // indices sorted by range, ties by index
  std::array<std::pair<std::size_t, std::size_t>, 4> groups;  // [begin, end) into `order`
  std::array<std::size_t, 4> counts;                          // replicas per point of each group
  std::vector<std::size_t> factor;                            // per original point

  std::size_t total_replicas() const;
};

/// Sorts by distance from the origin and splits into four contiguous groups
/// of floor(N/4) points, the first N mod 4 groups taking one extra point.
DsrPlan dsr_plan(const PointCloud& cloud, const std::array<std::size_t, 4>& counts);

/// Emits each point factor-many times in plan order (replicas contiguous) and
/// perturbs every replica with independent isotropic N(0, sigma^2) noise. The
/// noise of replica r comes from a stream derived from (seed, r).
PointCloud dsr_apply(const PointCloud& cloud, const DsrPlan& plan, double sigma, std::uint64_t seed);

/// Uniform replication baseline: every point `factor` times, same noise model.
PointCloud uniform_repeat(const PointCloud& cloud, std::size_t factor, double sigma, std::uint64_t seed);

}  // namespace linext::dsr
