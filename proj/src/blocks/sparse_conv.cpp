#include "linext/blocks/sparse_conv.hpp"

#include <memory>

#include "linext/nn/ops.hpp"

namespace linext::blocks {

spatial::SparseVoxelGrid sparse_conv(const spatial::SparseVoxelGrid& grid, const SparseConvKernel& kernel) {
  auto rules = std::make_shared<const spatial::Rulebook>(spatial::build_rulebook(grid.layout));
  nn::Tape tape;
  nn::Var y = nn::sparse_conv(tape.constant(grid.features), tape.constant(kernel.weight), tape.constant(kernel.bias), rules);
  spatial::SparseVoxelGrid out;
  out.layout = grid.layout;
  out.features = y.value();
  return out;
}

}  // namespace linext::blocks
