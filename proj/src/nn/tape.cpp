#include "linext/nn/tape.hpp"

#include "linext/core/error.hpp"

namespace linext::nn {

const Tensor& Var::value() const { return tape_->value(id_); }
bool Var::requires_grad() const { return tape_->requires_grad(id_); }

Var Tape::constant(Tensor value) {
  nodes_.push_back({std::move(value), {}, false, {}, nullptr});
  return {this, nodes_.size() - 1};
}

Var Tape::input(Tensor value) {
  nodes_.push_back({std::move(value), {}, true, {}, nullptr});
  return {this, nodes_.size() - 1};
}

Var Tape::param(Parameter& p) {
  if (auto it = param_nodes_.find(&p); it != param_nodes_.end()) return {this, it->second};
  nodes_.push_back({p.value, {}, true, {}, &p});
  param_nodes_.emplace(&p, nodes_.size() - 1);
  return {this, nodes_.size() - 1};
}

Var Tape::record(Tensor value, std::span<const Var> parents, BackwardFn fn) {
  bool needs = false;
  for (const auto& p : parents) {
    if (&p.tape() != this) throw ValidationError("mixing values from different tapes");
    needs = needs || nodes_[p.id()].requires_grad;
  }
  nodes_.push_back({std::move(value), {}, needs, needs ? std::move(fn) : BackwardFn{}, nullptr});
  return {this, nodes_.size() - 1};
}

Tensor* Tape::grad_slot(std::size_t id) {
  Node& n = nodes_[id];
  if (!n.requires_grad) return nullptr;
  if (n.grad.empty()) n.grad = Tensor::zeros_like(n.value);
  return &n.grad;
}

void Tape::backward(Var loss) {
  if (&loss.tape() != this) throw ValidationError("loss belongs to another tape");
  if (loss.value().size() != 1) throw ValidationError("backward needs a scalar loss");
  for (auto& n : nodes_) n.grad = Tensor{};
  Tensor* seed = grad_slot(loss.id());
  if (seed == nullptr) return;
  (*seed)[0] = 1.0;
  for (std::size_t id = nodes_.size(); id-- > 0;) {
    Node& n = nodes_[id];
    if (n.grad.empty()) continue;
    if (n.backward) n.backward(*this, id);
    if (n.param != nullptr) {
      auto g = nodes_[id].grad.data();
      auto dst = n.param->grad.data();
      for (std::size_t i = 0; i < g.size(); ++i) dst[i] += g[i];
      n.param->has_grad = true;
    }
  }
}

}  // namespace linext::nn
