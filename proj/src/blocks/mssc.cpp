#include "linext/blocks/mssc.hpp"

#include <cmath>

#include "linext/core/error.hpp"
#include "linext/nn/ops.hpp"

namespace linext::blocks {

Mssc::Mssc(nn::ParamStore& store, const std::string& prefix, const RunConfig& cfg, Rng& rng) {
  const std::size_t c = cfg.feature_dim;
  init_ = nn::Mlp(store, prefix + ".init", nn::mlp_widths(3, c, c, cfg.mlp_depth), rng);
  const double a = std::sqrt(6.0 / static_cast<double>((spatial::kKernelVolume + 1) * c));
  for (std::size_t k = 0; k < cfg.n_vox; ++k) {
    grids_.push_back(cfg.grid_size(k));
    const std::string base = prefix + ".scale" + std::to_string(k);
    scale_.emplace_back(store, base + ".mlp", nn::mlp_widths(c, c, c, cfg.mlp_depth), rng);
    for (int which = 1; which <= 2; ++which) {
      Tensor w({spatial::kKernelVolume, c, c});
      for (auto& v : w.data()) v = rng.uniform(-a, a);
      conv_w_.push_back(&store.add(base + ".conv" + std::to_string(which) + ".weight", std::move(w)));
      conv_b_.push_back(&store.add(base + ".conv" + std::to_string(which) + ".bias", Tensor({c})));
    }
  }
  end_ = nn::Mlp(store, prefix + ".end", nn::mlp_widths(cfg.n_vox * c, c, c, cfg.mlp_depth), rng);
}

MsscGeometry Mssc::geometry(const PointCloud& cloud) const {
  if (cloud.empty()) throw ValidationError("mssc: empty cloud");
  MsscGeometry geo;
  Point3 mean{};
  for (const auto& p : cloud) mean = mean + p;
  mean = mean * (1.0 / static_cast<double>(cloud.size()));
  geo.centered = Tensor({cloud.size(), 3});
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    geo.centered.at(i, 0) = cloud[i].x - mean.x;
    geo.centered.at(i, 1) = cloud[i].y - mean.y;
    geo.centered.at(i, 2) = cloud[i].z - mean.z;
  }
  for (double g : grids_) {
    auto layout = spatial::voxel_layout(cloud, g);
    geo.rules.push_back(std::make_shared<const spatial::Rulebook>(spatial::build_rulebook(layout)));
    geo.cell_count.push_back(layout.cell_count());
    geo.point_cell.push_back(std::move(layout.point_cell));
  }
  return geo;
}

nn::Var Mssc::forward(nn::Tape& tape, const MsscGeometry& geo) const {
  using namespace nn;
  Var x = init_.forward(tape.constant(geo.centered));
  std::vector<Var> outs;
  for (std::size_t k = 0; k < grids_.size(); ++k) {
    Var f = scale_[k].forward(x);
    Var t0 = segment_mean(f, geo.point_cell[k], geo.cell_count[k]);
    Var t1 = add(sparse_conv(t0, tape.param(*conv_w_[2 * k]), tape.param(*conv_b_[2 * k]), geo.rules[k]), t0);
    Var t2 = add(sparse_conv(t1, tape.param(*conv_w_[2 * k + 1]), tape.param(*conv_b_[2 * k + 1]), geo.rules[k]), t1);
    outs.push_back(add(gather_rows(t2, geo.point_cell[k]), f));
  }
  return end_.forward(concat_cols(outs));
}

}  // namespace linext::blocks
