#include "linext/pipeline/forward.hpp"

#include <cmath>
#include <string>

#include "linext/core/error.hpp"
#include "linext/nn/ops.hpp"
#include "linext/spatial/fps.hpp"
#include "linext/spatial/kdtree.hpp"

namespace linext::pipeline {

namespace {

constexpr std::uint64_t kStageStream = 1000;
constexpr std::uint64_t kCoarseStream = 2000;
constexpr std::uint64_t kRefineStream = 3000;

void nearest_seeds(const PointCloud& from, const PointCloud& seeds, std::vector<std::size_t>& seed_of,
                   Tensor& offset) {
  const auto nn = spatial::knn_tree(from, seeds, 1);
  seed_of.resize(from.size());
  offset = Tensor({from.size(), 3});
  for (std::size_t i = 0; i < from.size(); ++i) {
    seed_of[i] = nn.row(i)[0];
    const Point3 d = from[i] - seeds[seed_of[i]];
    offset.at(i, 0) = d.x;
    offset.at(i, 1) = d.y;
    offset.at(i, 2) = d.z;
  }
}

PointCloud to_cloud(const Tensor& t) { return PointCloud::from_tensor(t); }

}  // namespace

std::size_t stage_size(std::size_t n, double ratio, std::size_t i) {
  for (std::size_t s = 1; s <= i; ++s) n = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n)));
  return n;
}

N2cGeometry n2c_geometry(const Model& model, const PointCloud& input, const PointCloud& noise, std::uint64_t seed) {
  const RunConfig& cfg = model.config();
  if (input.empty() || noise.empty()) throw ValidationError("n2c: input and noise clouds must be non-empty");
  input.validate();
  noise.validate();
  if (noise.size() < cfg.knn_k) {
    throw ValidationError("n2c: noisy cloud has " + std::to_string(noise.size()) + " points, fewer than knn_k");
  }
  for (std::size_t i = 0; i < cfg.n2c_stages; ++i) {
    const std::size_t n = stage_size(input.size(), cfg.fps_ratio, i);
    if (n < cfg.knn_k) {
      throw ValidationError("n2c: stage " + std::to_string(i + 1) + " would hold " + std::to_string(n) +
                            " points, fewer than knn_k = " + std::to_string(cfg.knn_k));
    }
  }

  N2cGeometry geo;
  geo.noise = noise;
  geo.input_vox = model.mssc.geometry(input);
  geo.noise_vox = model.mssc.geometry(noise);
  geo.points.push_back(input);
  geo.select.emplace_back();
  geo.stage.push_back(model.stage_cpa[0].geometry(input, input, derive_seed(seed, kStageStream)));
  for (std::size_t i = 1; i < cfg.n2c_stages; ++i) {
    const PointCloud& prev = geo.points.back();
    auto sel = spatial::fps(prev, stage_size(input.size(), cfg.fps_ratio, i));
    PointCloud next = prev.select(sel);
    geo.stage.push_back(model.stage_cpa[i].geometry(next, prev, derive_seed(seed, kStageStream + i)));
    geo.select.push_back(std::move(sel));
    geo.points.push_back(std::move(next));
  }
  nearest_seeds(noise, geo.points.back(), geo.seed_of, geo.seed_offset);
  geo.coarse = model.coarse_cpa.geometry(noise, geo.points.front(), derive_seed(seed, kCoarseStream));
  return geo;
}

N2cVars n2c_forward(nn::Tape& tape, const Model& model, const N2cGeometry& geo) {
  using namespace nn;
  N2cVars out;
  const Var f0 = model.mssc.forward(tape, geo.input_vox);
  const Var f_noise = model.mssc.forward(tape, geo.noise_vox);

  out.features.push_back(model.stage_cpa[0].forward(geo.stage[0], f0, f0, f0));
  for (std::size_t i = 1; i < geo.points.size(); ++i) {
    const Var prev = out.features.back();
    const Var picked = gather_rows(prev, geo.select[i]);
    out.features.push_back(model.stage_cpa[i].forward(geo.stage[i], picked, prev, picked));
  }

  const Var seed_feats = gather_rows(out.features.back(), geo.seed_of);
  const Var value = model.seed_encoder.forward(tape.constant(geo.seed_offset), seed_feats);
  out.coarse_features = model.coarse_cpa.forward(geo.coarse, f_noise, out.features.front(), value);
  out.coarse_points = add(tape.constant(geo.noise.to_tensor()), model.coord_head.forward(out.coarse_features));
  return out;
}

N2cState n2c_state(const N2cGeometry& geo, const N2cVars& vars) {
  N2cState s;
  s.points = geo.points;
  for (const auto& f : vars.features) s.features.push_back(f.value());
  s.coarse = to_cloud(vars.coarse_points.value());
  s.coarse_features = vars.coarse_features.value();
  return s;
}

N2cState n2c_forward(const Model& model, const PointCloud& input, const PointCloud& noise, std::uint64_t seed) {
  const auto geo = n2c_geometry(model, input, noise, seed);
  nn::Tape tape;
  return n2c_state(geo, n2c_forward(tape, model, geo));
}

RefineGeometry refine_geometry(const Model& model, const N2cState& state, std::uint64_t seed) {
  if (state.points.empty() || state.coarse.empty()) throw ValidationError("refine: empty noise-to-coarse state");
  state.coarse.validate();
  RefineGeometry geo;
  nearest_seeds(state.coarse, state.points.back(), geo.seed_of, geo.seed_offset);
  geo.cpa = model.refine_cpa.geometry(state.coarse, state.points.front(), derive_seed(seed, kRefineStream));
  return geo;
}

std::pair<nn::Var, nn::Var> refine_forward(nn::Tape& tape, const Model& model, const N2cState& state,
                                           const RefineGeometry& geo) {
  using namespace nn;
  const Var seed_feats = gather_rows(tape.constant(state.features.back()), geo.seed_of);
  const Var value = model.refine_encoder.forward(tape.constant(geo.seed_offset), seed_feats);
  const Var f_refine = model.refine_cpa.forward(geo.cpa, tape.constant(state.coarse_features),
                                                tape.constant(state.features.front()), value);
  return model.upsampler.forward(tape.constant(state.coarse.to_tensor()), f_refine);
}

PointCloud refine_forward(const Model& model, const N2cState& state, std::uint64_t seed) {
  const auto geo = refine_geometry(model, state, seed);
  nn::Tape tape;
  return to_cloud(refine_forward(tape, model, state, geo).first.value());
}

}  // namespace linext::pipeline
