#pragma once

#include <cstdint>

#include "linext/core/types.hpp"

namespace linext {

/// Voxel-grid downsampling to at most `target` points.
///
/// The grid is anchored at the cloud's minimum corner. The voxel edge is
/// bisected between a size that keeps more than `target` cells and one that
/// keeps at most `target`. If the upper bracket hits `target` exactly the
/// per-voxel centroids are returned; otherwise the centroids of the lower
/// bracket are subsampled uniformly (seeded) to exactly `target`, so the
/// result has exactly `target` points whenever the input has at least that
/// many. Clouds already at or below `target` are returned unchanged.
PointCloud voxel_downsample(const PointCloud& cloud, std::size_t target, std::uint64_t seed = 0);

/// Keeps `target` points chosen uniformly without replacement, in original order.
PointCloud random_subsample(const PointCloud& cloud, std::size_t target, std::uint64_t seed);

}  // namespace linext
