#include "permurank/optimizer.hpp"

#include <cmath>
#include <stdexcept>

namespace permurank {

void AdamW::step(Tensor& param, const Tensor& grad) {
  if (!param.same_shape(grad)) throw std::invalid_argument("AdamW: gradient shape mismatch");
  Slot& s = state_[&param];
  if (s.m.empty()) {
    s.m.assign(param.numel(), 0.0);
    s.v.assign(param.numel(), 0.0);
  }
  double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < param.numel(); ++i) {
    double g = grad[i];
    s.m[i] = beta1_ * s.m[i] + (1.0 - beta1_) * g;
    s.v[i] = beta2_ * s.v[i] + (1.0 - beta2_) * g * g;
    double mhat = s.m[i] / bc1;
    double vhat = s.v[i] / bc2;
    param[i] -= lr_ * (mhat / (std::sqrt(vhat) + eps_) + wd_ * param[i]);
  }
}

}  // namespace permurank
