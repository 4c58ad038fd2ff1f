#include "linext/nn/mlp.hpp"

#include "linext/core/error.hpp"
#include "linext/nn/ops.hpp"

namespace linext::nn {

Var mlp_forward(Var x, std::span<Parameter* const> layers) {
  if (layers.empty() || layers.size() % 2 != 0) throw ValidationError("mlp_forward: expected weight/bias pairs");
  Tape& tape = x.tape();
  Var h = x;
  const std::size_t depth = layers.size() / 2;
  for (std::size_t l = 0; l < depth; ++l) {
    h = linear(h, tape.param(*layers[2 * l]), tape.param(*layers[2 * l + 1]));
    if (l + 1 < depth) h = relu(h);
  }
  return h;
}

Mlp::Mlp(ParamStore& store, const std::string& prefix, const std::vector<std::size_t>& widths, Rng& rng)
    : widths_(widths) {
  if (widths.size() < 2) throw ValidationError("Mlp needs at least input and output widths");
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const std::string base = prefix + "." + std::to_string(l);
    layers_.push_back(&store.add(base + ".weight", xavier_uniform(widths[l], widths[l + 1], rng)));
    layers_.push_back(&store.add(base + ".bias", Tensor({widths[l + 1]})));
  }
}

Var Mlp::forward(Var x) const { return mlp_forward(x, layers_); }

std::vector<std::size_t> mlp_widths(std::size_t in, std::size_t width, std::size_t out, std::size_t depth) {
  if (depth == 0) throw ValidationError("mlp depth must be positive");
  std::vector<std::size_t> w{in};
  for (std::size_t l = 1; l < depth; ++l) w.push_back(width);
  w.push_back(out);
  return w;
}

}  // namespace linext::nn
