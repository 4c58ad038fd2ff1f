#include "linext/blocks/upsample.hpp"

#include "linext/core/error.hpp"
#include "linext/nn/ops.hpp"

namespace linext::blocks {

SpdUpsampler::SpdUpsampler(nn::ParamStore& store, const std::string& prefix, const RunConfig& cfg, Rng& rng)
    : factor_(cfg.upsample_factor), radius_(cfg.upsample_radius) {
  if (factor_ == 0) throw ValidationError("upsampler: factor must be >= 1");
  const std::size_t c = cfg.feature_dim;
  Tensor e({factor_, c});
  for (auto& v : e.data()) v = rng.normal(0.0, 1.0);
  slots_ = &store.add(prefix + ".slots", std::move(e));
  split_ = nn::Mlp(store, prefix + ".split", nn::mlp_widths(2 * c, c, 3, cfg.mlp_depth), rng);
  feat_ = nn::Mlp(store, prefix + ".feat", nn::mlp_widths(2 * c, c, c, cfg.mlp_depth), rng);
}

std::pair<nn::Var, nn::Var> SpdUpsampler::forward(nn::Var p_in, nn::Var f_in) const {
  using namespace nn;
  if (p_in.value().rank() != 2 || p_in.dim(1) != 3 || f_in.value().rank() != 2 || f_in.dim(0) != p_in.dim(0) ||
      f_in.dim(1) != slots_->value.dim(1)) {
    throw ValidationError("upsampler: expected M x 3 points and M x C features");
  }
  const std::size_t m = p_in.dim(0);
  std::vector<std::size_t> parent(m * factor_), slot(m * factor_);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t u = 0; u < factor_; ++u) {
      parent[i * factor_ + u] = i;
      slot[i * factor_ + u] = u;
    }
  }
  Tape& tape = p_in.tape();
  const Var parts[] = {gather_rows(f_in, parent), gather_rows(tape.param(*slots_), slot)};
  Var row = concat_cols(parts);
  Var offset = scale(nn::tanh(split_.forward(row)), radius_);
  Var points = add(gather_rows(p_in, parent), offset);
  return {points, feat_.forward(row)};
}

}  // namespace linext::blocks
