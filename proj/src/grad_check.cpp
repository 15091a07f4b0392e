#include "permurank/grad_check.hpp"

#include <cmath>
#include <limits>

namespace permurank {

namespace {

double eval_scalar(const ScalarFn& f, const std::vector<Tensor>& inputs) {
  Tape tape;
  std::vector<Var> vars;
  vars.reserve(inputs.size());
  for (const Tensor& t : inputs) vars.push_back(tape.constant(t));
  return f(tape, vars).value().scalar_value();
}

}  // namespace

GradCheckReport grad_check(const ScalarFn& f, const std::vector<Tensor>& inputs, double h) {
  GradCheckReport report;

  // Analytic gradients from one reverse sweep.
  Tape tape;
  std::vector<Var> vars;
  vars.reserve(inputs.size());
  for (const Tensor& t : inputs) vars.push_back(tape.leaf(t));
  Var out = f(tape, vars);
  tape.backward(out);
  std::vector<Tensor> analytic;
  analytic.reserve(inputs.size());
  for (Var v : vars) analytic.push_back(tape.grad(v));

  // Central differences, one coordinate at a time.
  std::vector<Tensor> probe = inputs;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    for (std::size_t c = 0; c < inputs[k].numel(); ++c) {
      double x0 = probe[k][c];
      probe[k][c] = x0 + h;
      double fp = eval_scalar(f, probe);
      probe[k][c] = x0 - h;
      double fm = eval_scalar(f, probe);
      probe[k][c] = x0;
      double numeric = (fp - fm) / (2.0 * h);
      double a = analytic[k][c];
      if (!std::isfinite(numeric) || !std::isfinite(a)) {
        report.nan_found = true;
        report.worst_input = static_cast<int>(k);
        report.worst_coord = static_cast<int>(c);
        report.max_rel_err = std::numeric_limits<double>::infinity();
        return report;
      }
      double rel = std::abs(a - numeric) / std::max(1.0, std::abs(a));
      if (rel > report.max_rel_err) {
        report.max_rel_err = rel;
        report.worst_input = static_cast<int>(k);
        report.worst_coord = static_cast<int>(c);
      }
    }
  }
  return report;
}

}  // namespace permurank
