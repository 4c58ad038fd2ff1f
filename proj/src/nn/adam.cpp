#include "linext/nn/adam.hpp"

#include <cmath>

#include "linext/core/error.hpp"

namespace linext::nn {

void adam_step(std::span<Parameter* const> params, const AdamOptions& opt) {
  for (const Parameter* p : params) {
    if (!p->has_grad) throw ValidationError("adam_step: parameter " + p->name + " has no gradient");
  }
  for (Parameter* p : params) {
    ++p->step;
    const double bc1 = 1.0 - std::pow(opt.beta1, static_cast<double>(p->step));
    const double bc2 = 1.0 - std::pow(opt.beta2, static_cast<double>(p->step));
    auto theta = p->value.data();
    auto g = p->grad.data();
    auto m = p->m.data();
    auto v = p->v.data();
    for (std::size_t i = 0; i < theta.size(); ++i) {
      theta[i] -= opt.lr * opt.weight_decay * theta[i];
      m[i] = opt.beta1 * m[i] + (1.0 - opt.beta1) * g[i];
      v[i] = opt.beta2 * v[i] + (1.0 - opt.beta2) * g[i] * g[i];
      const double m_hat = m[i] / bc1;
      const double v_hat = v[i] / bc2;
      theta[i] -= opt.lr * m_hat / (std::sqrt(v_hat) + opt.eps);
    }
    p->zero_grad();
  }
}

}  // namespace linext::nn
