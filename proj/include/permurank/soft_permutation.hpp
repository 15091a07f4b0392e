#pragma once

#include <vector>

#include "permurank/autodiff.hpp"
#include "permurank/tensor.hpp"

namespace permurank {

/// Row-stochastic relaxation of argsort at temperature tau. Row k holds the
/// soft assignment of items to rank position k.
struct SoftPermutationMatrix {
  Tensor matrix;  // L x L
  double tau = 1.0;
};

/// Descending argsort with ties broken by lower item index. order[k] is the
/// item placed at rank position k.
std::vector<int> hard_permutation(const std::vector<double>& scores);

/// Inverse map: position_of[item] = rank position of that item.
std::vector<int> invert_permutation(const std::vector<int>& order);

/// Exact 0/1 matrix of a hard permutation (row k one-hot at order[k]).
Tensor hard_permutation_matrix(const std::vector<int>& order);

/// Pi[k,l] = exp(-|s_l - s_[k]|/tau) / sum_j exp(-|s_j - s_[k]|/tau), where
/// s_[k] is the k-th largest score. Differentiable w.r.t. scores; the sort
/// indices come from a detached copy, so gradient flows through both the s_l
/// and the gathered s_[k] coordinates. scores is an L x 1 column.
Var softsort_matrix(Var scores, double tau);

/// Value-only convenience wrapper.
SoftPermutationMatrix softsort(const std::vector<double>& scores, double tau);

/// Straight-through combination: forward equals the exact hard permutation
/// matrix, backward gradient equals that of softsort_matrix. Realized as
/// detach(P_hard - Pi) + Pi.
Var ste_matrix(Var scores, double tau);

/// Soft position rows Pi^T . P; row l is the position-embedding mixture item
/// l receives. P must have exactly L rows.
Var soft_position_embed(Var pi_soft, Var position_table);

}  // namespace permurank
