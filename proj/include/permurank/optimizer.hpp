#pragma once

#include <unordered_map>
#include <vector>

#include "permurank/tensor.hpp"

namespace permurank {

/// Adaptive moment estimation with decoupled weight decay.
class AdamW {
 public:
  AdamW(double lr = 1e-3, double weight_decay = 1e-2, double beta1 = 0.9,
        double beta2 = 0.999, double eps = 1e-8)
      : lr_(lr), wd_(weight_decay), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void set_lr(double lr) { lr_ = lr; }
  double lr() const { return lr_; }

  /// One update of a parameter tensor given its gradient. State is keyed by
  /// the tensor's address, so the parameter structs must stay put.
  void step(Tensor& param, const Tensor& grad);

  void next_step() { ++t_; }

 private:
  struct Slot {
    std::vector<double> m, v;
  };
  double lr_, wd_, beta1_, beta2_, eps_;
  long t_ = 1;
  std::unordered_map<const Tensor*, Slot> state_;
};

}  // namespace permurank
