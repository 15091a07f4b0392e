#include "permurank/soft_permutation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace permurank {

std::vector<int> hard_permutation(const std::vector<double>& scores) {
  for (double s : scores) {
    if (!std::isfinite(s)) throw std::invalid_argument("hard_permutation: non-finite score");
  }
  std::vector<int> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return scores[a] > scores[b]; });
  return order;
}

std::vector<int> invert_permutation(const std::vector<int>& order) {
  std::vector<int> pos(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) pos[order[k]] = static_cast<int>(k);
  return pos;
}

Tensor hard_permutation_matrix(const std::vector<int>& order) {
  int n = static_cast<int>(order.size());
  Tensor p = Tensor::zeros({n, n});
  for (int k = 0; k < n; ++k) p.at(k, order[k]) = 1.0;
  return p;
}

Var softsort_matrix(Var scores, double tau) {
  if (!(tau > 0.0)) throw std::domain_error("softsort: tau must be positive");
  const Tensor& s = scores.value();
  if (s.rank() != 2 || s.cols() != 1 || s.rows() < 1) {
    throw std::invalid_argument("softsort: scores must be an L x 1 column");
  }
  int n = s.rows();
  std::vector<double> vals(s.data(), s.data() + n);
  std::vector<int> order = hard_permutation(vals);

  Tape& t = *scores.tape;
  Var sorted = select_rows(scores, order);                       // L x 1, descending
  Var ones_row = t.constant(Tensor::full({1, n}, 1.0));
  Var ones_col = t.constant(Tensor::full({n, 1}, 1.0));
  Var lhs = matmul(sorted, ones_row);                            // [k,l] = s_[k]
  Var rhs = matmul(ones_col, transpose(scores));                 // [k,l] = s_l
  Var dist = abs(sub(lhs, rhs));
  return softmax_rows(scale(dist, -1.0 / tau));
}

SoftPermutationMatrix softsort(const std::vector<double>& scores, double tau) {
  Tape tape;
  Var s = tape.constant(Tensor::column(scores));
  Var pi = softsort_matrix(s, tau);
  return SoftPermutationMatrix{pi.value(), tau};
}

Var ste_matrix(Var scores, double tau) {
  Var soft = softsort_matrix(scores, tau);
  const Tensor& s = scores.value();
  std::vector<double> vals(s.data(), s.data() + s.rows());
  Tensor hard = hard_permutation_matrix(hard_permutation(vals));
  const Tensor& soft_val = soft.value();
  Tensor delta = hard;
  for (std::size_t i = 0; i < delta.numel(); ++i) delta[i] -= soft_val[i];
  return add(scores.tape->constant(std::move(delta)), soft);
}

Var soft_position_embed(Var pi_soft, Var position_table) {
  const Tensor& pi = pi_soft.value();
  const Tensor& p = position_table.value();
  if (pi.rank() != 2 || pi.rows() != pi.cols()) {
    throw std::invalid_argument("soft_position_embed: permutation matrix must be square");
  }
  if (p.rank() != 2 || p.rows() != pi.rows()) {
    throw std::invalid_argument("soft_position_embed: position table row count must equal L");
  }
  return matmul(transpose(pi_soft), position_table);
}

}  // namespace permurank
