#pragma once

#include <memory>
#include <span>
#include <vector>

#include "linext/core/types.hpp"
#include "linext/nn/tape.hpp"
#include "linext/spatial/knn.hpp"
#include "linext/spatial/voxel_grid.hpp"

namespace linext::nn {

// Elementwise. Shapes must match exactly.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double s);
Var relu(Var x);
Var tanh(Var x);

/// x (N x I) * W (I x O) + b (O).
Var linear(Var x, Var w, Var b);

/// Column concatenation of rank-2 tensors with equal row counts.
Var concat_cols(std::span<const Var> parts);

/// out[m] = src[idx[m]] for a rank-2 src; backward scatter-adds.
Var gather_rows(Var src, std::span<const std::size_t> idx);

/// Mean of the rows of x that share a segment id; out has `segments` rows.
Var segment_mean(Var x, std::span<const std::size_t> segment_of, std::size_t segments);

/// out[q, :, j] = src[idx(q, j), :] -> M x C x K.
Var gather_neighbors(Var src, const spatial::NeighborIndex& idx);

/// x (M x C) repeated along a new trailing axis -> M x C x K.
Var broadcast_k(Var x, std::size_t k);

/// Serial-segment max pooling: N x C x K -> N x C x S, max over each of the S
/// contiguous runs of K/S neighbours. The gradient goes to the first maximum.
Var ssmp(Var x, std::size_t segments);

/// Segment max of alpha - key[neighbour] without forming the M x C x K block:
/// out[q*S + s, c] = max over j in segment s of alpha[q*K + j, c] - key[idx(q, j), c].
/// alpha: (M*K) x C, key: N x C. First maximum wins, as in ssmp.
Var relative_max_pool(Var alpha, Var key, const spatial::NeighborIndex& idx, std::size_t segments);
/// Swaps the last two axes of a rank-3 tensor.
Var swap_last_axes(Var x);

Var reshape(Var x, std::vector<std::size_t> shape);

/// Max-shifted softmax along `axis`.
Var softmax(Var x, std::size_t axis);

/// A x B x C -> A x C, summing over the middle axis.
Var sum_middle(Var x);

/// Sum of all elements -> [1].
Var sum(Var x);
/// Mean of all elements -> [1].
Var mean(Var x);
/// Sum of x * w for a constant weight tensor of the same shape -> [1].
Var weighted_sum(Var x, const Tensor& w);

/// Submanifold 3x3x3 convolution over occupied cells.
/// x: cells x I, w: 27 x I x O, b: O -> cells x O.
Var sparse_conv(Var x, Var w, Var b, std::shared_ptr<const spatial::Rulebook> rules);

/// Symmetric squared Chamfer distance between predicted points (N x 3) and a
/// fixed cloud. Nearest neighbours are held fixed through the backward pass.
Var chamfer_loss(Var pred, const PointCloud& target);

}  // namespace linext::nn
