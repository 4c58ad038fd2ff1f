#pragma once

#include <span>

#include "linext/nn/parameter.hpp"

namespace linext::nn {

struct AdamOptions {
  double lr = 2e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
};

/// Bias-corrected Adam with decoupled weight decay:
///   theta <- theta - lr * wd * theta
///   theta <- theta - lr * m_hat / (sqrt(v_hat) + eps)
/// Gradients are zeroed afterwards. Throws if a parameter never received one.
void adam_step(std::span<Parameter* const> params, const AdamOptions& opt);

}  // namespace linext::nn
