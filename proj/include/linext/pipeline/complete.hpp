#pragma once

#include <cstdint>

#include "linext/pipeline/model.hpp"

namespace linext::pipeline {

struct CompleteOptions {
  bool refine = false;
  bool merge_input = false;  // append the input scan to the result
  std::uint64_t seed = 0;
};

/// DSR noise, one noise-to-coarse pass, and optionally refinement. Uses the
/// same per-scene derivation as training scene 0 under `seed`.
PointCloud complete(const PointCloud& input, const Model& model, const CompleteOptions& opts);

}  // namespace linext::pipeline
