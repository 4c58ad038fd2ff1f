#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "linext/pipeline/model.hpp"

namespace linext::pipeline {

/// Coordinate-only work of one noise-to-coarse pass: voxel rulebooks,
/// sampling, neighbour lists and serial orders. Fixed for a fixed
/// (input, noise, seed), so training can build it once per scene.
struct N2cGeometry {
  PointCloud noise;
  blocks::MsscGeometry input_vox;
  blocks::MsscGeometry noise_vox;
  std::vector<PointCloud> points;                // P_1 .. P_N
  std::vector<std::vector<std::size_t>> select;  // select[i]: rows of P_i taken into P_{i+1}
  std::vector<blocks::CpaGeometry> stage;
  std::vector<std::size_t> seed_of;  // nearest seed of every noise point
  Tensor seed_offset;                // noise point minus that seed
  blocks::CpaGeometry coarse;
};

N2cGeometry n2c_geometry(const Model& model, const PointCloud& input, const PointCloud& noise, std::uint64_t seed);

/// Taped outputs of one noise-to-coarse pass.
struct N2cVars {
  std::vector<nn::Var> features;  // F_1 .. F_N
  nn::Var coarse_points;          // |noise| x 3
  nn::Var coarse_features;        // |noise| x C
};

N2cVars n2c_forward(nn::Tape& tape, const Model& model, const N2cGeometry& geo);

/// Plain values of a noise-to-coarse pass. Seeds are points.back() and
/// features.back().
struct N2cState {
  std::vector<PointCloud> points;
  std::vector<Tensor> features;
  PointCloud coarse;
  Tensor coarse_features;
};

N2cState n2c_state(const N2cGeometry& geo, const N2cVars& vars);
N2cState n2c_forward(const Model& model, const PointCloud& input, const PointCloud& noise, std::uint64_t seed);

struct RefineGeometry {
  std::vector<std::size_t> seed_of;
  Tensor seed_offset;
  blocks::CpaGeometry cpa;
};

RefineGeometry refine_geometry(const Model& model, const N2cState& state, std::uint64_t seed);

/// Upsampled points and features. The state enters as constants.
std::pair<nn::Var, nn::Var> refine_forward(nn::Tape& tape, const Model& model, const N2cState& state,
                                           const RefineGeometry& geo);
PointCloud refine_forward(const Model& model, const N2cState& state, std::uint64_t seed);

/// Size of hierarchy stage i (0-based) for an input of n points.
std::size_t stage_size(std::size_t n, double ratio, std::size_t i);

}  // namespace linext::pipeline
