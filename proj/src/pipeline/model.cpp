#include "linext/pipeline/model.hpp"

#include <string>

#include "linext/core/error.hpp"

namespace linext::pipeline {

Model::Model(const RunConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
  cfg_.validate();
  Rng rng(derive_seed(seed, 0x6d6f64656cULL));
  const std::size_t c = cfg_.feature_dim;
  mssc = blocks::Mssc(store_, "n2c.mssc", cfg_, rng);
  for (std::size_t i = 0; i < cfg_.n2c_stages; ++i) {
    stage_cpa.emplace_back(store_, "n2c.stage" + std::to_string(i + 1), cfg_, rng);
  }
  seed_encoder = blocks::PointNetLite(store_, "n2c.seed", cfg_, rng);
  coarse_cpa = blocks::Cpa(store_, "n2c.coarse", cfg_, rng);
  coord_head = nn::Mlp(store_, "n2c.coord", nn::mlp_widths(c, c, 3, cfg_.mlp_depth), rng);

  refine_encoder = blocks::PointNetLite(store_, "refine.seed", cfg_, rng);
  refine_cpa = blocks::Cpa(store_, "refine.cpa", cfg_, rng);
  upsampler = blocks::SpdUpsampler(store_, "refine.up", cfg_, rng);
}

Model Model::from_checkpoint(const Checkpoint& ckpt, const RunConfig& cfg) {
  if (!same_architecture(ckpt.config, cfg)) {
    throw ValidationError("checkpoint was written for a different model configuration");
  }
  Model m(cfg, 0);
  m.store_.load_table(ckpt.params);
  return m;
}

bool same_architecture(const RunConfig& a, const RunConfig& b) {
  return a.feature_dim == b.feature_dim && a.knn_k == b.knn_k && a.segments == b.segments && a.n_vox == b.n_vox &&
         a.n2c_stages == b.n2c_stages && a.fps_ratio == b.fps_ratio && a.upsample_factor == b.upsample_factor &&
         a.mlp_depth == b.mlp_depth && a.base_grid == b.base_grid && a.upsample_radius == b.upsample_radius &&
         a.serial_bits == b.serial_bits;
}

}  // namespace linext::pipeline
