#include "linext/spatial/voxel_grid.hpp"

#include "linext/core/error.hpp"

namespace linext::spatial {

VoxelLayout voxel_layout(const PointCloud& cloud, double resolution) {
  if (!(resolution > 0.0)) throw ValidationError("voxel resolution must be positive");
  VoxelLayout v;
  v.resolution = resolution;
  v.point_cell.resize(cloud.size());
  v.lookup.reserve(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Cell3 c = cell_of(cloud[i], resolution);
    auto [it, inserted] = v.lookup.emplace(c, v.cells.size());
    if (inserted) {
      v.cells.push_back(c);
      v.members.emplace_back();
    }
    v.members[it->second].push_back(i);
    v.point_cell[i] = it->second;
  }
  return v;
}

SparseVoxelGrid voxelize(const PointCloud& cloud, const Tensor& features, double resolution) {
  if (features.rank() != 2 || features.dim(0) != cloud.size()) {
    throw ValidationError("voxelize: features must be N x C and row-aligned with the cloud");
  }
  SparseVoxelGrid g;
  g.layout = voxel_layout(cloud, resolution);
  const std::size_t c = features.dim(1);
  g.features = Tensor({g.layout.cell_count(), c});
  for (std::size_t cell = 0; cell < g.layout.cell_count(); ++cell) {
    const auto& mem = g.layout.members[cell];
    for (auto p : mem) {
      for (std::size_t ch = 0; ch < c; ++ch) g.features.at(cell, ch) += features.at(p, ch);
    }
    const double inv = 1.0 / static_cast<double>(mem.size());
    for (std::size_t ch = 0; ch < c; ++ch) g.features.at(cell, ch) *= inv;
  }
  return g;
}

std::array<std::int64_t, 3> kernel_offset(std::size_t o) {
  return {static_cast<std::int64_t>(o % 3) - 1, static_cast<std::int64_t>((o / 3) % 3) - 1,
          static_cast<std::int64_t>(o / 9) - 1};
}

Rulebook build_rulebook(const VoxelLayout& layout) {
  Rulebook rb;
  rb.cell_count = layout.cell_count();
  for (std::size_t o = 0; o < kKernelVolume; ++o) {
    const auto off = kernel_offset(o);
    for (std::size_t out = 0; out < layout.cell_count(); ++out) {
      const Cell3& c = layout.cells[out];
      auto it = layout.lookup.find({c.i + off[0], c.j + off[1], c.k + off[2]});
      if (it != layout.lookup.end()) rb.pairs[o].emplace_back(it->second, out);
    }
  }
  return rb;
}

}  // namespace linext::spatial
