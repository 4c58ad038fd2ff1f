#include "linext/core/downsample.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_map>

#include "linext/core/cell.hpp"
#include "linext/core/error.hpp"
#include "linext/core/rng.hpp"

namespace linext {

namespace {

std::size_t occupied_cells(const PointCloud& cloud, Point3 origin, double edge) {
  std::unordered_map<Cell3, std::size_t, Cell3Hash> cells;
  cells.reserve(cloud.size());
  for (const auto& p : cloud) cells.emplace(cell_of(p - origin, edge), 0);
  return cells.size();
}

PointCloud centroids(const PointCloud& cloud, Point3 origin, double edge) {
  std::unordered_map<Cell3, std::size_t, Cell3Hash> slot;
  std::vector<Point3> sum;
  std::vector<std::size_t> count;
  for (const auto& p : cloud) {
    auto [it, inserted] = slot.emplace(cell_of(p - origin, edge), sum.size());
    if (inserted) {
      sum.push_back({});
      count.push_back(0);
    }
    sum[it->second] = sum[it->second] + p;
    ++count[it->second];
  }
  for (std::size_t c = 0; c < sum.size(); ++c) sum[c] = sum[c] * (1.0 / static_cast<double>(count[c]));
  return PointCloud(std::move(sum));
}

}  // namespace

PointCloud random_subsample(const PointCloud& cloud, std::size_t target, std::uint64_t seed) {
  if (target >= cloud.size()) return cloud;
  std::vector<std::size_t> idx(cloud.size());
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(seed);
  for (std::size_t i = 0; i < target; ++i) {
    const std::size_t j = i + rng.index(idx.size() - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(target);
  std::sort(idx.begin(), idx.end());
  return cloud.select(idx);
}

PointCloud voxel_downsample(const PointCloud& cloud, std::size_t target, std::uint64_t seed) {
  if (cloud.empty()) throw ValidationError("voxel_downsample: empty cloud");
  if (target == 0) throw ValidationError("voxel_downsample: target must be >= 1");
  if (cloud.size() <= target) return cloud;

  const Bounds b = Bounds::of(cloud);
  const double extent = std::max({b.max.x - b.min.x, b.max.y - b.min.y, b.max.z - b.min.z});
  double hi = 2.0 * extent + 1.0;  // one cell
  double lo = std::max(extent, 1.0) * 1e-12;
  if (occupied_cells(cloud, b.min, lo) <= target) {
    // Too many coincident points for voxels to reach the target.
    return random_subsample(cloud, target, seed);
  }
  for (int it = 0; it < 200 && hi - lo > lo * 1e-12; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (occupied_cells(cloud, b.min, mid) > target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  PointCloud at_hi = centroids(cloud, b.min, hi);
  if (at_hi.size() == target) return at_hi;
  return random_subsample(centroids(cloud, b.min, lo), target, seed);
}

}  // namespace linext
