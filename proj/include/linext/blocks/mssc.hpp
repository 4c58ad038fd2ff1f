#pragma once

#include <memory>
#include <string>
#include <vector>

#include "linext/core/config.hpp"
#include "linext/nn/mlp.hpp"
#include "linext/spatial/voxel_grid.hpp"

namespace linext::blocks {

/// Voxel structure of one cloud at every MSSC scale. Depends on coordinates
/// only, so it can be reused while the parameters change.
struct MsscGeometry {
  Tensor centered;  // N x 3, coordinates minus their centroid
  std::vector<std::vector<std::size_t>> point_cell;
  std::vector<std::size_t> cell_count;
  std::vector<std::shared_ptr<const spatial::Rulebook>> rules;
};

/// Multi-scale sparse convolution.
///
/// X = MLP_init(P - mean(P)); for each voxel edge g_k = base * 2^k:
/// F_k = MLP_k(X), T_k = voxel means of F_k, two residual submanifold
/// convolutions T'_k = conv1(T_k) + T_k, T''_k = conv2(T'_k) + T'_k, and
/// O_k = T''_k[cell(p)] + F_k. The output is MLP_end(concat_k O_k), N x C.
///
/// Centering the input coordinates makes the output invariant to any shift
/// that moves every point by a whole number of cells at each scale.
class Mssc {
public:
  Mssc() = default;
  Mssc(nn::ParamStore& store, const std::string& prefix, const RunConfig& cfg, Rng& rng);

  MsscGeometry geometry(const PointCloud& cloud) const;
  nn::Var forward(nn::Tape& tape, const MsscGeometry& geo) const;
  nn::Var forward(nn::Tape& tape, const PointCloud& cloud) const { return forward(tape, geometry(cloud)); }

  std::size_t scales() const { return grids_.size(); }
  double grid(std::size_t k) const { return grids_[k]; }
  nn::Parameter& conv_weight(std::size_t k, std::size_t which) const { return *conv_w_[2 * k + which]; }
  nn::Parameter& conv_bias(std::size_t k, std::size_t which) const { return *conv_b_[2 * k + which]; }
  const nn::Mlp& init_mlp() const { return init_; }
  const nn::Mlp& scale_mlp(std::size_t k) const { return scale_[k]; }
  const nn::Mlp& end_mlp() const { return end_; }

private:
  std::vector<double> grids_;
  nn::Mlp init_;
  std::vector<nn::Mlp> scale_;
  std::vector<nn::Parameter*> conv_w_;
  std::vector<nn::Parameter*> conv_b_;
  nn::Mlp end_;
};

}  // namespace linext::blocks
