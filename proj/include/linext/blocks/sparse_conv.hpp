#pragma once

#include "linext/core/types.hpp"
#include "linext/spatial/voxel_grid.hpp"

namespace linext::blocks {

struct SparseConvKernel {
  Tensor weight;  // 27 x I x O, offset layout of spatial::kernel_offset
  Tensor bias;    // O
};

/// Submanifold convolution: outputs exist only at occupied cells,
/// out(c) = sum_o W[o]^T in(c + o) + b, with empty neighbours contributing zero.
spatial::SparseVoxelGrid sparse_conv(const spatial::SparseVoxelGrid& grid, const SparseConvKernel& kernel);

}  // namespace linext::blocks
