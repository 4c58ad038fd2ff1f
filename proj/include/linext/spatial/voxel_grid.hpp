#pragma once

#include <array>
#include <unordered_map>
#include <utility>
#include <vector>

#include "linext/core/cell.hpp"
#include "linext/core/types.hpp"

namespace linext::spatial {

/// Point-to-cell assignment at one resolution. Cells are numbered in order of
/// first appearance; member lists keep point order.
struct VoxelLayout {
  double resolution = 0.0;
  std::vector<Cell3> cells;
  std::vector<std::vector<std::size_t>> members;
  std::vector<std::size_t> point_cell;
  std::unordered_map<Cell3, std::size_t, Cell3Hash> lookup;

  std::size_t cell_count() const { return cells.size(); }
};

VoxelLayout voxel_layout(const PointCloud& cloud, double resolution);

/// Occupied cells with a mean feature row per cell.
struct SparseVoxelGrid {
  VoxelLayout layout;
  Tensor features;  // cells x C
};

/// Each point goes to cell floor(p / g); cell features are member means.
SparseVoxelGrid voxelize(const PointCloud& cloud, const Tensor& features, double resolution);

/// Offsets of the 3x3x3 neighbourhood; offset o = (dx+1) + 3(dy+1) + 9(dz+1).
inline constexpr std::size_t kKernelVolume = 27;
std::array<std::int64_t, 3> kernel_offset(std::size_t o);

/// For every kernel offset, the (input cell, output cell) pairs with both occupied.
struct Rulebook {
  std::array<std::vector<std::pair<std::size_t, std::size_t>>, kKernelVolume> pairs;
  std::size_t cell_count = 0;
};

Rulebook build_rulebook(const VoxelLayout& layout);

}  // namespace linext::spatial
