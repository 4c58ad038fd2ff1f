#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "linext/pipeline/model.hpp"

namespace linext::pipeline {

enum class Stage { N2C, Refine };

std::string to_string(Stage s);

struct Scene {
  PointCloud input;
  PointCloud gt;
};

struct TrainOptions {
  std::string checkpoint_path;  // rewritten after every epoch when set
  std::ostream* log = nullptr;  // one JSON record per step
};

struct TrainResult {
  std::vector<double> losses;  // mean Chamfer distance of each step's batch
};

/// Seed of scene `index` under run seed `seed`. DSR noise and serial orders
/// of that scene are derived from it.
std::uint64_t scene_seed(std::uint64_t seed, std::size_t index);

/// DSR-corrupted copy of `input` using the config's repeat counts and sigma.
PointCloud make_noise(const PointCloud& input, const RunConfig& cfg, std::uint64_t seed);

/// Adam on one stage's parameters, the other stage untouched. A step runs
/// forward and backward on up to batch_size scenes, accumulating gradients,
/// then updates once. Refinement reads noise-to-coarse outputs recomputed
/// with the current (frozen) weights. Throws Error on a non-finite loss.
TrainResult train_stage(Model& model, Stage stage, const std::vector<Scene>& scenes, const TrainOptions& opts = {});

}  // namespace linext::pipeline
