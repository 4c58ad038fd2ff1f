#include "linext/blocks/pointnet_lite.hpp"

#include "linext/core/error.hpp"
#include "linext/nn/ops.hpp"

namespace linext::blocks {

PointNetLite::PointNetLite(nn::ParamStore& store, const std::string& prefix, const RunConfig& cfg, Rng& rng) {
  const std::size_t c = cfg.feature_dim;
  mlp_ = nn::Mlp(store, prefix + ".mlp", nn::mlp_widths(3 + c, c, c, cfg.mlp_depth), rng);
}

nn::Var PointNetLite::forward(nn::Var coords, nn::Var seed_feats) const {
  if (coords.value().rank() != 2 || coords.dim(1) != 3 || seed_feats.value().rank() != 2 ||
      seed_feats.dim(0) != coords.dim(0) || seed_feats.dim(1) + 3 != mlp_.in_dim()) {
    throw ValidationError("pointnet_lite: expected M x 3 coordinates and M x C features");
  }
  const nn::Var parts[] = {coords, seed_feats};
  return mlp_.forward(nn::concat_cols(parts));
}

}  // namespace linext::blocks
