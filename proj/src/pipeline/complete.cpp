#include "linext/pipeline/complete.hpp"

#include "linext/pipeline/forward.hpp"
#include "linext/pipeline/train.hpp"

namespace linext::pipeline {

PointCloud complete(const PointCloud& input, const Model& model, const CompleteOptions& opts) {
  const std::uint64_t ss = scene_seed(opts.seed, 0);
  const N2cState state = n2c_forward(model, input, make_noise(input, model.config(), ss), ss);
  PointCloud out = opts.refine ? refine_forward(model, state, ss) : state.coarse;
  if (opts.merge_input) {
    out.reserve(out.size() + input.size());
    for (const auto& p : input) out.push_back(p);
  }
  return out;
}

}  // namespace linext::pipeline
