#include "linext/core/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "linext/core/error.hpp"

namespace linext {

void RunConfig::validate() const {
  auto fail = [](const std::string& what) { throw ValidationError("invalid config: " + what); };
  if (feature_dim == 0) fail("feature_dim must be positive");
  if (knn_k == 0) fail("knn_k must be positive");
  if (segments == 0 || knn_k % segments != 0) fail("knn_k must be divisible by segments");
  if (n_vox == 0) fail("n_vox must be positive");
  if (n2c_stages == 0) fail("n2c_stages must be positive");
  if (!(fps_ratio > 0.0 && fps_ratio <= 1.0)) fail("fps_ratio must lie in (0, 1]");
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) fail("noise_sigma must be >= 0");
  if (upsample_factor == 0) fail("upsample_factor must be >= 1");
  for (auto r : repeat_counts) {
    if (r == 0) fail("repeat counts must be positive");
  }
  if (mlp_depth == 0) fail("mlp_depth must be positive");
  if (!(base_grid > 0.0)) fail("base_grid must be positive");
  if (!(upsample_radius >= 0.0)) fail("upsample_radius must be >= 0");
  if (serial_bits == 0 || serial_bits > 21) fail("serial_bits must lie in [1, 21]");
  if (!(lr_n2c >= 0.0) || !(lr_refine >= 0.0)) fail("learning rates must be >= 0");
  if (!(weight_decay >= 0.0)) fail("weight_decay must be >= 0");
  if (batch_size == 0) fail("batch_size must be positive");
  if (gt_target == 0) fail("gt_target must be positive");
  if (scene_bounds.degenerate()) fail("scene bounds have zero extent");
}

double RunConfig::grid_size(std::size_t k) const { return base_grid * std::ldexp(1.0, static_cast<int>(k)); }

namespace {

nlohmann::json point_json(Point3 p) { return nlohmann::json::array({p.x, p.y, p.z}); }

Point3 point_from(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3) throw ValidationError("expected a 3-element array");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

}  // namespace

void to_json(nlohmann::json& j, const RunConfig& c) {
  j = nlohmann::json{
      {"feature_dim", c.feature_dim},
      {"knn_k", c.knn_k},
      {"segments", c.segments},
      {"n_vox", c.n_vox},
      {"n2c_stages", c.n2c_stages},
      {"fps_ratio", c.fps_ratio},
      {"noise_sigma", c.noise_sigma},
      {"upsample_factor", c.upsample_factor},
      {"repeat_counts", c.repeat_counts},
      {"seed", c.seed},
      {"scene_bounds", {{"min", point_json(c.scene_bounds.min)}, {"max", point_json(c.scene_bounds.max)}}},
      {"mlp_depth", c.mlp_depth},
      {"base_grid", c.base_grid},
      {"upsample_radius", c.upsample_radius},
      {"serial_bits", c.serial_bits},
      {"lr_n2c", c.lr_n2c},
      {"lr_refine", c.lr_refine},
      {"weight_decay", c.weight_decay},
      {"batch_size", c.batch_size},
      {"n2c_epochs", c.n2c_epochs},
      {"refine_epochs", c.refine_epochs},
      {"max_steps", c.max_steps},
      {"resample_noise", c.resample_noise},
      {"gt_target", c.gt_target},
  };
}

void from_json(const nlohmann::json& j, RunConfig& c) {
  if (!j.is_object()) throw ValidationError("config must be a JSON object");
  static const std::set<std::string> known = {
      "feature_dim", "knn_k",      "segments",        "n_vox",       "n2c_stages",   "fps_ratio",
      "noise_sigma", "upsample_factor", "repeat_counts", "seed",     "scene_bounds", "mlp_depth",
      "base_grid",   "upsample_radius", "serial_bits",  "lr_n2c",     "lr_refine",    "weight_decay",
      "batch_size",  "n2c_epochs", "refine_epochs",   "max_steps",   "resample_noise", "gt_target"};
  for (const auto& [key, _] : j.items()) {
    if (!known.contains(key)) throw ValidationError("unknown config key: " + key);
  }
  try {
    auto get = [&](const char* key, auto& field) {
      if (j.contains(key)) j.at(key).get_to(field);
    };
    get("feature_dim", c.feature_dim);
    get("knn_k", c.knn_k);
    get("segments", c.segments);
    get("n_vox", c.n_vox);
    get("n2c_stages", c.n2c_stages);
    get("fps_ratio", c.fps_ratio);
    get("noise_sigma", c.noise_sigma);
    get("upsample_factor", c.upsample_factor);
    get("repeat_counts", c.repeat_counts);
    get("seed", c.seed);
    if (j.contains("scene_bounds")) {
      const auto& b = j.at("scene_bounds");
      c.scene_bounds.min = point_from(b.at("min"));
      c.scene_bounds.max = point_from(b.at("max"));
    }
    get("mlp_depth", c.mlp_depth);
    get("base_grid", c.base_grid);
    get("upsample_radius", c.upsample_radius);
    get("serial_bits", c.serial_bits);
    get("lr_n2c", c.lr_n2c);
    get("lr_refine", c.lr_refine);
    get("weight_decay", c.weight_decay);
    get("batch_size", c.batch_size);
    get("n2c_epochs", c.n2c_epochs);
    get("refine_epochs", c.refine_epochs);
    get("max_steps", c.max_steps);
    get("resample_noise", c.resample_noise);
    get("gt_target", c.gt_target);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed config: ") + e.what());
  }
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("config " + path + " is not valid JSON: " + e.what());
  }
  RunConfig cfg = j.get<RunConfig>();
  cfg.validate();
  return cfg;
}

}  // namespace linext
