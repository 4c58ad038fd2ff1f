#include "linext/nn/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "linext/core/error.hpp"
#include "linext/core/rng.hpp"

namespace linext::nn {

namespace {

struct Eval {
  double value;
  std::uint64_t signature;
};

Eval evaluate(const std::function<Var(Tape&)>& f) {
  Tape tape;
  tape.track_branches(true);
  const double v = f(tape).value()[0];
  return {v, tape.branch_signature()};
}

}  // namespace

GradCheckReport grad_check(const std::function<Var(Tape&)>& f, const std::vector<Parameter*>& targets,
                           const GradCheckOptions& opt) {
  for (auto* p : targets) p->zero_grad();
  {
    Tape tape;
    Var y = f(tape);
    if (y.value().size() != 1) throw ValidationError("grad_check: function must return a scalar");
    tape.backward(y);
  }
  GradCheckReport report;
  const std::uint64_t base = evaluate(f).signature;
  Rng rng(opt.seed);
  for (auto* p : targets) {
    std::vector<std::size_t> coords(p->value.size());
    std::iota(coords.begin(), coords.end(), 0);
    if (opt.max_coords_per_target > 0 && coords.size() > opt.max_coords_per_target) {
      for (std::size_t i = 0; i < opt.max_coords_per_target; ++i) {
        std::swap(coords[i], coords[i + rng.index(coords.size() - i)]);
      }
      coords.resize(opt.max_coords_per_target);
    }
    for (auto c : coords) {
      const double orig = p->value[c];
      p->value[c] = orig + opt.h;
      const auto fp = evaluate(f);
      p->value[c] = orig - opt.h;
      const auto fm = evaluate(f);
      p->value[c] = orig;
      if (fp.signature != base || fm.signature != base) ++report.kink_crossings;
      const double numeric = (fp.value - fm.value) / (2.0 * opt.h);
      const double analytic = p->has_grad ? p->grad[c] : 0.0;
      const double err = std::abs(analytic - numeric) / std::max(1.0, std::abs(numeric));
      ++report.checked;
      if (err > report.max_rel_error || !std::isfinite(err)) {
        report.max_rel_error = std::isfinite(err) ? err : std::numeric_limits<double>::infinity();
        report.worst_target = p->name;
        report.worst_index = c;
        report.worst_analytic = analytic;
        report.worst_numeric = numeric;
      }
    }
  }
  for (auto* p : targets) p->zero_grad();
  report.passed = report.max_rel_error <= opt.tol;
  return report;
}

}  // namespace linext::nn
