#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "linext/nn/parameter.hpp"
#include "linext/nn/tape.hpp"

namespace linext::nn {

struct GradCheckOptions {
  double h = 1e-5;
  double tol = 1e-4;
  /// Coordinates checked per target; 0 checks every coordinate. When capped,
  /// a seeded sample is taken.
  std::size_t max_coords_per_target = 0;
  std::uint64_t seed = 0;
};

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::string worst_target;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  /// Coordinates whose +h or -h evaluation took a different branch of a
  /// non-smooth op than the unperturbed point. Their central difference
  /// straddles a kink and says nothing about the derivative.
  std::size_t kink_crossings = 0;
  bool passed = true;
};

/// Compares reverse-mode gradients of a scalar function against central
/// differences. `f` must build its scalar from `tape.param(...)` of the
/// targets. Error per coordinate is |g_ad - g_fd| / max(1, |g_fd|).
/// Every coordinate counts toward the error, kink crossings included.
GradCheckReport grad_check(const std::function<Var(Tape&)>& f, const std::vector<Parameter*>& targets,
                           const GradCheckOptions& opt = {});

}  // namespace linext::nn
