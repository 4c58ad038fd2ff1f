#include "linext/pipeline/train.hpp"

#include <cmath>
#include <json.hpp>
#include <optional>

#include "linext/core/checkpoint.hpp"
#include "linext/core/error.hpp"
#include "linext/dsr/dsr.hpp"
#include "linext/nn/adam.hpp"
#include "linext/nn/ops.hpp"
#include "linext/pipeline/forward.hpp"

namespace linext::pipeline {

std::string to_string(Stage s) { return s == Stage::N2C ? "n2c" : "refine"; }

std::uint64_t scene_seed(std::uint64_t seed, std::size_t index) { return derive_seed(seed, 0x5c3e0000ULL + index); }

PointCloud make_noise(const PointCloud& input, const RunConfig& cfg, std::uint64_t seed) {
  return dsr::dsr_apply(input, dsr::dsr_plan(input, cfg.repeat_counts), cfg.noise_sigma, derive_seed(seed, 0));
}

TrainResult train_stage(Model& model, Stage stage, const std::vector<Scene>& scenes, const TrainOptions& opts) {
  const RunConfig& cfg = model.config();
  if (scenes.empty()) throw ValidationError("train: no scenes given");
  for (const auto& s : scenes) {
    if (s.input.empty() || s.gt.empty()) throw ValidationError("train: scene with an empty cloud");
  }

  const auto params = stage == Stage::N2C ? model.n2c_params() : model.refine_params();
  nn::AdamOptions adam;
  adam.lr = stage == Stage::N2C ? cfg.lr_n2c : cfg.lr_refine;
  adam.weight_decay = cfg.weight_decay;
  const std::size_t epochs = stage == Stage::N2C ? cfg.n2c_epochs : cfg.refine_epochs;

  std::vector<std::optional<N2cGeometry>> cache(scenes.size());
  auto geometry = [&](std::size_t s, std::size_t step) -> const N2cGeometry& {
    const std::uint64_t ss = scene_seed(cfg.seed, s);
    if (cfg.resample_noise) {
      const std::uint64_t ns = derive_seed(ss, step + 1);
      cache[s] = n2c_geometry(model, scenes[s].input, make_noise(scenes[s].input, cfg, ns), ss);
    } else if (!cache[s]) {
      cache[s] = n2c_geometry(model, scenes[s].input, make_noise(scenes[s].input, cfg, ss), ss);
    }
    return *cache[s];
  };

  for (auto* p : params) p->zero_grad();
  TrainResult result;
  std::size_t step = 0;
  bool done = false;
  for (std::size_t epoch = 0; epoch < epochs && !done; ++epoch) {
    for (std::size_t begin = 0; begin < scenes.size(); begin += cfg.batch_size) {
      if (cfg.max_steps != 0 && step >= cfg.max_steps) {
        done = true;
        break;
      }
      const std::size_t end = std::min(scenes.size(), begin + cfg.batch_size);
      const double weight = 1.0 / static_cast<double>(end - begin);
      double cd = 0.0;
      for (std::size_t s = begin; s < end; ++s) {
        const auto& geo = geometry(s, step);
        nn::Tape tape;
        nn::Var pred;
        if (stage == Stage::N2C) {
          pred = n2c_forward(tape, model, geo).coarse_points;
        } else {
          nn::Tape frozen;
          const N2cState state = n2c_state(geo, n2c_forward(frozen, model, geo));
          const auto rgeo = refine_geometry(model, state, scene_seed(cfg.seed, s));
          pred = refine_forward(tape, model, state, rgeo).first;
        }
        const nn::Var loss = nn::chamfer_loss(pred, scenes[s].gt);
        const double value = loss.value()[0];
        if (!std::isfinite(value)) {
          throw Error("train " + to_string(stage) + ": non-finite loss at step " + std::to_string(step) +
                      " on scene " + std::to_string(s));
        }
        tape.backward(nn::scale(loss, weight));
        cd += weight * value;
      }
      // The upsampler's feature head has no consumer, so not every stage
      // parameter is reached by the loss.
      std::vector<nn::Parameter*> reached;
      for (auto* p : params) {
        if (p->has_grad) reached.push_back(p);
      }
      nn::adam_step(reached, adam);
      result.losses.push_back(cd);
      if (opts.log != nullptr) {
        nlohmann::json rec{{"step", step}, {"stage", to_string(stage)}, {"cd", cd}, {"lr", adam.lr}, {"seed", cfg.seed}};
        *opts.log << rec.dump() << '\n';
      }
      ++step;
    }
    if (!opts.checkpoint_path.empty()) save_checkpoint(model.params().to_table(), cfg, opts.checkpoint_path);
  }
  if (opts.log != nullptr) opts.log->flush();
  return result;
}

}  // namespace linext::pipeline
