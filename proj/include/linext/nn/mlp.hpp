#pragma once

#include <span>
#include <string>
#include <vector>

#include "linext/nn/parameter.hpp"
#include "linext/nn/tape.hpp"

namespace linext::nn {

/// y = W_L(...ReLU(W_1 x + b_1)...) + b_L. `layers` alternates weight (I x O)
/// and bias (O) parameters.
Var mlp_forward(Var x, std::span<Parameter* const> layers);

/// Shared per-row MLP whose parameters live in a ParamStore under `prefix`.
class Mlp {
public:
  Mlp() = default;
  /// widths = {in, hidden..., out}; weights are Xavier-uniform, biases zero.
  Mlp(ParamStore& store, const std::string& prefix, const std::vector<std::size_t>& widths, Rng& rng);

  Var forward(Var x) const;

  std::size_t in_dim() const { return widths_.front(); }
  std::size_t out_dim() const { return widths_.back(); }
  const std::vector<Parameter*>& layers() const { return layers_; }
  Parameter& weight(std::size_t layer) const { return *layers_[2 * layer]; }
  Parameter& bias(std::size_t layer) const { return *layers_[2 * layer + 1]; }
  std::size_t depth() const { return layers_.size() / 2; }

private:
  std::vector<std::size_t> widths_;
  std::vector<Parameter*> layers_;
};

/// {in, width x (depth-1), out}.
std::vector<std::size_t> mlp_widths(std::size_t in, std::size_t width, std::size_t out, std::size_t depth);

}  // namespace linext::nn
