#pragma once

#include <string>
#include <utility>

#include "linext/core/config.hpp"
#include "linext/nn/mlp.hpp"

namespace linext::blocks {

/// Point-splitting upsampler. Every parent spawns U children, parent-major.
/// For child u of parent m the input row is concat(F_in[m], e_u) with e_u a
/// learned slot embedding; the child sits at P_in[m] + radius * tanh(MLP_split)
/// and carries MLP_feat of the same row.
class SpdUpsampler {
public:
  SpdUpsampler() = default;
  SpdUpsampler(nn::ParamStore& store, const std::string& prefix, const RunConfig& cfg, Rng& rng);

  /// P_in: M x 3, F_in: M x C -> ((U*M) x 3, (U*M) x C).
  std::pair<nn::Var, nn::Var> forward(nn::Var p_in, nn::Var f_in) const;

  std::size_t factor() const { return factor_; }
  double radius() const { return radius_; }
  nn::Parameter& slot_embedding() const { return *slots_; }
  const nn::Mlp& split_mlp() const { return split_; }
  const nn::Mlp& feat_mlp() const { return feat_; }

private:
  std::size_t factor_ = 6;
  double radius_ = 0.25;
  nn::Parameter* slots_ = nullptr;
  nn::Mlp split_;
  nn::Mlp feat_;
};

}  // namespace linext::blocks
