#pragma once

#include <string>

#include "linext/core/config.hpp"
#include "linext/nn/mlp.hpp"

namespace linext::blocks {

/// Shared per-point MLP over concat(coords, seed features) -> C channels.
/// No pooling, so permuting the rows permutes the output.
class PointNetLite {
public:
  PointNetLite() = default;
  PointNetLite(nn::ParamStore& store, const std::string& prefix, const RunConfig& cfg, Rng& rng);

  nn::Var forward(nn::Var coords, nn::Var seed_feats) const;
  const nn::Mlp& mlp() const { return mlp_; }

private:
  nn::Mlp mlp_;
};

}  // namespace linext::blocks
