#pragma once

#include <array>
#include <cstdint>
#include <string>

#include <json.hpp>

#include "linext/core/types.hpp"

namespace linext {

/// Hyperparameters shared by every stage of the pipeline.
struct RunConfig {
  std::size_t feature_dim = 32;
  std::size_t knn_k = 16;
  std::size_t segments = 4;
  std::size_t n_vox = 4;
  std::size_t n2c_stages = 3;
  double fps_ratio = 0.25;
  double noise_sigma = 1.0;
  std::size_t upsample_factor = 6;
  std::array<std::size_t, 4> repeat_counts{5, 8, 12, 15};
  std::uint64_t seed = 0;
  Bounds scene_bounds{{-50.0, -50.0, -5.0}, {50.0, 50.0, 15.0}};

  // network shape
  std::size_t mlp_depth = 2;
  double base_grid = 0.01;
  double upsample_radius = 0.25;
  unsigned serial_bits = 10;

  // optimisation
  double lr_n2c = 2e-4;
  double lr_refine = 5e-4;
  double weight_decay = 1e-4;
  std::size_t batch_size = 2;
  std::size_t n2c_epochs = 10;
  std::size_t refine_epochs = 5;
  std::size_t max_steps = 0;  // 0: no cap
  bool resample_noise = false;  // fresh DSR noise every step instead of once per scene
  std::size_t gt_target = 180000;

  /// Throws ValidationError when an invariant fails.
  void validate() const;

  /// Voxel edge of MSSC scale k (0-based): base_grid * 2^k.
  double grid_size(std::size_t k) const;
};

void to_json(nlohmann::json& j, const RunConfig& cfg);
/// Missing keys keep their defaults; unknown keys are rejected.
void from_json(const nlohmann::json& j, RunConfig& cfg);

RunConfig load_config(const std::string& path);

}  // namespace linext
