#include "linext/nn/parameter.hpp"

#include <cmath>

#include "linext/core/error.hpp"

namespace linext::nn {

Parameter::Parameter(std::string n, Tensor init)
    : name(std::move(n)),
      value(std::move(init)),
      grad(Tensor::zeros_like(value)),
      m(Tensor::zeros_like(value)),
      v(Tensor::zeros_like(value)) {}

void Parameter::zero_grad() {
  grad.fill(0.0);
  has_grad = false;
}

Parameter& ParamStore::add(const std::string& name, Tensor init) {
  auto [it, inserted] = params_.try_emplace(name, name, std::move(init));
  if (!inserted) throw ValidationError("duplicate parameter name " + name);
  return it->second;
}

Parameter& ParamStore::at(const std::string& name) {
  auto it = params_.find(name);
  if (it == params_.end()) throw ValidationError("unknown parameter " + name);
  return it->second;
}

const Parameter& ParamStore::at(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) throw ValidationError("unknown parameter " + name);
  return it->second;
}

std::vector<Parameter*> ParamStore::with_prefix(std::string_view prefix) {
  std::vector<Parameter*> out;
  for (auto& [name, p] : params_) {
    if (name.starts_with(prefix)) out.push_back(&p);
  }
  return out;
}

std::size_t ParamStore::element_count() const {
  std::size_t n = 0;
  for (const auto& [_, p] : params_) n += p.value.size();
  return n;
}

TensorTable ParamStore::to_table() const {
  TensorTable t;
  for (const auto& [name, p] : params_) t.emplace(name, p.value);
  return t;
}

void ParamStore::load_table(const TensorTable& table) {
  if (table.size() != params_.size()) {
    throw ValidationError("checkpoint holds " + std::to_string(table.size()) + " tensors, model expects " +
                          std::to_string(params_.size()));
  }
  for (auto& [name, p] : params_) {
    auto it = table.find(name);
    if (it == table.end()) throw ValidationError("checkpoint is missing parameter " + name);
    if (it->second.shape() != p.value.shape()) {
      throw ValidationError("parameter " + name + " has shape " + shape_string(it->second.shape()) +
                            " in the checkpoint, expected " + shape_string(p.value.shape()));
    }
    p.value = it->second;
  }
}

Tensor xavier_uniform(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Tensor w({fan_in, fan_out});
  for (auto& x : w.data()) x = rng.uniform(-a, a);
  return w;
}

}  // namespace linext::nn
