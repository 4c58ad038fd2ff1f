#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "linext/core/checkpoint.hpp"
#include "linext/core/rng.hpp"
#include "linext/core/types.hpp"

namespace linext::nn {

/// A learned tensor with its gradient slot and Adam moments.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;
  Tensor m;
  Tensor v;
  std::uint64_t step = 0;
  bool has_grad = false;

  Parameter(std::string name, Tensor init);
  void zero_grad();
};

/// Name-ordered parameter table. Parameter addresses are stable for the
/// lifetime of the store.
class ParamStore {
public:
  ParamStore() = default;
  ParamStore(const ParamStore&) = delete;
  ParamStore& operator=(const ParamStore&) = delete;
  ParamStore(ParamStore&&) = default;
  ParamStore& operator=(ParamStore&&) = default;

  Parameter& add(const std::string& name, Tensor init);
  Parameter& at(const std::string& name);
  const Parameter& at(const std::string& name) const;
  bool contains(const std::string& name) const { return params_.contains(name); }

  std::vector<Parameter*> with_prefix(std::string_view prefix);
  std::vector<Parameter*> all() { return with_prefix(""); }

  std::size_t size() const { return params_.size(); }
  std::size_t element_count() const;

  TensorTable to_table() const;
  /// Copies values in; names and shapes must match this store exactly.
  void load_table(const TensorTable& table);

private:
  std::map<std::string, Parameter> params_;
};

/// Uniform(-a, a) with a = sqrt(6 / (fan_in + fan_out)).
Tensor xavier_uniform(std::size_t fan_in, std::size_t fan_out, Rng& rng);

}  // namespace linext::nn
