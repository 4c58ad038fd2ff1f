#include "linext/blocks/cpa.hpp"

#include <algorithm>

#include "linext/core/error.hpp"
#include "linext/nn/ops.hpp"
#include "linext/spatial/kdtree.hpp"

namespace linext::blocks {

Cpa::Cpa(nn::ParamStore& store, const std::string& prefix, const RunConfig& cfg, Rng& rng)
    : k_(cfg.knn_k), segments_(cfg.segments), bits_(cfg.serial_bits) {
  if (k_ % segments_ != 0) throw ValidationError("cpa: knn_k must be divisible by segments");
  const std::size_t c = cfg.feature_dim;
  pos_ = nn::Mlp(store, prefix + ".pos", nn::mlp_widths(3, c, c, cfg.mlp_depth), rng);
  attn_ = nn::Mlp(store, prefix + ".attn", nn::mlp_widths(c, c, c, cfg.mlp_depth), rng);
}

CpaGeometry Cpa::geometry(const PointCloud& p_query, const PointCloud& p_key, std::uint64_t serial_seed) const {
  if (p_key.size() < k_) {
    throw ValidationError("cpa: " + std::to_string(k_) + " neighbours requested from " + std::to_string(p_key.size()) +
                          " keys");
  }
  if (p_query.empty()) throw ValidationError("cpa: empty query set");
  CpaGeometry geo;
  geo.idx = spatial::knn_tree(p_query, p_key, k_);

  // Keys are serialised within their own box so the order does not depend
  // on where the scene sits.
  const auto code = spatial::serialize(p_key, spatial::Curve::Random, bits_, spatial::serial_bounds(p_key), serial_seed);
  geo.curve = code.curve;
  const auto rank = code.ranks();
  for (std::size_t q = 0; q < p_query.size(); ++q) {
    auto row = geo.idx.row(q);
    std::sort(row.begin(), row.end(), [&](std::size_t a, std::size_t c) { return rank[a] < rank[c]; });
  }

  geo.disp = Tensor({p_query.size() * k_, 3});
  for (std::size_t q = 0; q < p_query.size(); ++q) {
    const auto row = geo.idx.row(q);
    for (std::size_t j = 0; j < k_; ++j) {
      const Point3 d = p_query[q] - p_key[row[j]];
      const std::size_t r = q * k_ + j;
      geo.disp.at(r, 0) = d.x;
      geo.disp.at(r, 1) = d.y;
      geo.disp.at(r, 2) = d.z;
    }
  }
  return geo;
}

nn::Var Cpa::forward(const CpaGeometry& geo, nn::Var query, nn::Var key, nn::Var value) const {
  using namespace nn;
  const std::size_t m = geo.idx.queries();
  if (query.value().rank() != 2 || query.dim(0) != m || value.shape() != query.shape()) {
    throw ValidationError("cpa: query and value must both be M x C with M = " + std::to_string(m));
  }
  if (key.value().rank() != 2 || key.dim(1) != query.dim(1)) throw ValidationError("cpa: key must be N x C");
  const std::size_t c = query.dim(1);
  Tape& tape = query.tape();

  // query and value are constant across a query's neighbours, so they leave
  // the segment max: max_j(q - k_j + a_j) = q + max_j(a_j - k_j).
  const Var alpha = pos_.forward(tape.constant(geo.disp));                      // (M*K) x C
  const Var pooled = relative_max_pool(alpha, key, geo.idx, segments_);          // (M*S) x C
  std::vector<std::size_t> owner(m * segments_);
  for (std::size_t i = 0; i < owner.size(); ++i) owner[i] = i / segments_;
  const Var q_hat = add(gather_rows(query, owner), pooled);
  const Var v_hat = add(gather_rows(value, owner), pooled);
  const Var weights = softmax(reshape(attn_.forward(q_hat), {m, segments_, c}), 1);
  const Var fused = sum_middle(mul(weights, reshape(v_hat, {m, segments_, c})));
  return add(value, fused);
}

}  // namespace linext::blocks
