#pragma once

#include <cstdint>
#include <string>

#include "linext/core/config.hpp"
#include "linext/nn/mlp.hpp"
#include "linext/spatial/knn.hpp"
#include "linext/spatial/serialize.hpp"

namespace linext::blocks {

/// Coordinate-only part of a cross-point attention call.
struct CpaGeometry {
  spatial::NeighborIndex idx;  // K keys per query, listed in serial-curve order
  Tensor disp;                 // (M*K) x 3, query position minus neighbour position
  spatial::Curve curve = spatial::Curve::Z;
};

/// Cross-point attention between a query set and a key set.
///
/// For each query the K nearest keys are found and listed in the order a
/// randomly chosen space-filling curve visits them. With
///   alpha = MLP_pos(p_query - p_neighbour)
///   Q_rel = query - key[nbr] + alpha,  V_rel = value - key[nbr] + alpha
/// (query/value broadcast over the K neighbours), both are max-pooled over
/// K/S-long serial segments, A = softmax over segments of MLP_attn(Q_hat),
/// and the result is value + sum_j A_j * V_hat_j with per-channel weights.
class Cpa {
public:
  Cpa() = default;
  Cpa(nn::ParamStore& store, const std::string& prefix, const RunConfig& cfg, Rng& rng);

  CpaGeometry geometry(const PointCloud& p_query, const PointCloud& p_key, std::uint64_t serial_seed) const;

  /// query, value: M x C; key: N x C.
  nn::Var forward(const CpaGeometry& geo, nn::Var query, nn::Var key, nn::Var value) const;
  nn::Var forward(const PointCloud& p_query, nn::Var query, const PointCloud& p_key, nn::Var key, nn::Var value,
                  std::uint64_t serial_seed) const {
    return forward(geometry(p_query, p_key, serial_seed), query, key, value);
  }

  std::size_t k() const { return k_; }
  std::size_t segments() const { return segments_; }
  const nn::Mlp& pos_mlp() const { return pos_; }
  const nn::Mlp& attn_mlp() const { return attn_; }

private:
  std::size_t k_ = 16;
  std::size_t segments_ = 4;
  unsigned bits_ = 10;
  nn::Mlp pos_;
  nn::Mlp attn_;
};

}  // namespace linext::blocks
