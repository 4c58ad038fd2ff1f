#pragma once

#include <cstdint>
#include <vector>

#include "linext/blocks/cpa.hpp"
#include "linext/blocks/mssc.hpp"
#include "linext/blocks/pointnet_lite.hpp"
#include "linext/blocks/upsample.hpp"
#include "linext/core/checkpoint.hpp"
#include "linext/core/config.hpp"

namespace linext::pipeline {

/// Every learned block of both stages. Noise-to-coarse parameters are named
/// "n2c.*", refinement parameters "refine.*".
class Model {
public:
  Model(const RunConfig& cfg, std::uint64_t seed);
  Model(const Model&) = delete;
  Model(Model&&) = default;
  Model& operator=(const Model&) = delete;

  /// Rebuilds the architecture from `cfg` and loads the checkpoint's tensors.
  /// Throws ValidationError if the checkpoint was written for a different
  /// architecture.
  static Model from_checkpoint(const Checkpoint& ckpt, const RunConfig& cfg);

  const RunConfig& config() const { return cfg_; }
  nn::ParamStore& params() { return store_; }
  const nn::ParamStore& params() const { return store_; }
  std::vector<nn::Parameter*> n2c_params() { return store_.with_prefix("n2c."); }
  std::vector<nn::Parameter*> refine_params() { return store_.with_prefix("refine."); }

  // noise-to-coarse
  blocks::Mssc mssc;
  std::vector<blocks::Cpa> stage_cpa;  // one per hierarchy stage
  blocks::PointNetLite seed_encoder;
  blocks::Cpa coarse_cpa;
  nn::Mlp coord_head;  // C -> 3 offset added to the noisy positions

  // refinement
  blocks::PointNetLite refine_encoder;
  blocks::Cpa refine_cpa;
  blocks::SpdUpsampler upsampler;

private:
  RunConfig cfg_;
  nn::ParamStore store_;
};

/// True when two configs build identically shaped and wired networks.
bool same_architecture(const RunConfig& a, const RunConfig& b);

}  // namespace linext::pipeline
