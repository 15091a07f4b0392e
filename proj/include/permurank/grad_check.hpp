#pragma once

#include <functional>
#include <vector>

#include "permurank/autodiff.hpp"

namespace permurank {

/// Builds a fresh tape around the given leaves and returns the scalar output.
using ScalarFn = std::function<Var(Tape&, const std::vector<Var>&)>;

struct GradCheckReport {
  double max_rel_err = 0.0;
  int worst_input = -1;   // index into the inputs vector
  int worst_coord = -1;   // flat coordinate within that input
  bool nan_found = false;

  bool ok(double tol) const { return !nan_found && max_rel_err < tol; }
};

/// Compares reverse-mode gradients against central finite differences.
/// Per-coordinate error is |analytic - numeric| / max(1, |analytic|). The
/// function is assumed smooth at x; callers sample inputs away from kinks
/// (|.| at 0, tied scores in sort-based ops).
GradCheckReport grad_check(const ScalarFn& f, const std::vector<Tensor>& inputs,
                           double h = 1e-5);

}  // namespace permurank
