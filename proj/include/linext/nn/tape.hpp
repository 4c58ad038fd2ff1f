#pragma once

#include <functional>
#include <initializer_list>
#include <span>
#include <unordered_map>
#include <vector>

#include "linext/core/rng.hpp"
#include "linext/core/types.hpp"
#include "linext/nn/parameter.hpp"

namespace linext::nn {

class Tape;

/// Handle to a value recorded on a Tape.
class Var {
public:
  Var() = default;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape& tape() const { return *tape_; }
  std::size_t id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

  const Tensor& value() const;
  const std::vector<std::size_t>& shape() const { return value().shape(); }
  std::size_t dim(std::size_t axis) const { return value().dim(axis); }
  bool requires_grad() const;

private:
  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Linear record of primitive applications. backward() visits nodes in exact
/// reverse order; gradients of a value with several consumers add up.
class Tape {
public:
  using BackwardFn = std::function<void(Tape&, std::size_t self)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  /// Leaf whose gradient can be read with grad() after backward().
  Var input(Tensor value);
  /// Leaf bound to a parameter; backward() adds into Parameter::grad.
  Var param(Parameter& p);

  /// Records an op. `fn` runs only if some parent requires a gradient.
  Var record(Tensor value, std::span<const Var> parents, BackwardFn fn);
  Var record(Tensor value, std::initializer_list<Var> parents, BackwardFn fn) {
    return record(std::move(value), std::span<const Var>(parents.begin(), parents.size()), std::move(fn));
  }

  /// Seeds d(loss)/d(loss) = 1; loss must hold exactly one element.
  void backward(Var loss);

  const Tensor& value(std::size_t id) const { return nodes_[id].value; }
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  /// Gradient accumulated for `v`, or an empty tensor.
  const Tensor& grad(Var v) const { return nodes_[v.id()].grad; }
  /// Gradient of a node the backward rule is running for.
  const Tensor& out_grad(std::size_t id) const { return nodes_[id].grad; }
  /// Zero-initialised gradient slot of a parent, or nullptr if it needs none.
  Tensor* grad_slot(std::size_t id);

  std::size_t size() const { return nodes_.size(); }

  /// Off by default. When on, ops with a non-smooth branch (relu, max
  /// pooling, nearest-neighbour matching) fold every branch choice into
  /// branch_signature(). Two evaluations with equal signatures lie on the
  /// same smooth piece of the function.
  void track_branches(bool on) { track_branches_ = on; }
  bool tracking_branches() const { return track_branches_; }
  void note_branch(std::uint64_t choice) { branch_signature_ = mix64(branch_signature_ ^ choice); }
  std::uint64_t branch_signature() const { return branch_signature_; }

private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    BackwardFn backward;
    Parameter* param = nullptr;
  };

  std::vector<Node> nodes_;
  std::unordered_map<Parameter*, std::size_t> param_nodes_;
  bool track_branches_ = false;
  std::uint64_t branch_signature_ = 0;
};

}  // namespace linext::nn
