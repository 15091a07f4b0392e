#pragma once

#include <cstdint>

#include "permurank/dataset.hpp"
#include "permurank/user_oracles.hpp"

namespace permurank {

/// Synthetic world: latent relevance is a shared random bilinear form of
/// (query, item) plus a per-group difficulty offset and per-item noise; the
/// logging policy sorts by a noisy copy of the latent relevance. Item
/// feature vectors are [base features ; brand one-hot ; color one-hot], so
/// the full item dimension is base_item_dim + n_brands + n_colors.
struct SyntheticWorldConfig {
  int query_dim = 8;
  int base_item_dim = 6;
  int list_length = 8;   // L, at most 10
  int n_brands = 5;
  int n_colors = 5;
  double relevance_noise = 0.5;  // per-item, unlearnable
  double group_bias = 1.0;       // per-group difficulty offset scale
  double logging_noise = 0.75;   // sigma_log of the production ranker
  LabelMode label_mode = LabelMode::kSoftIps;
  int perms_per_group = 1;       // 5 mirrors multi-permutation logging
  std::uint64_t seed = 0;

  int full_item_dim() const { return base_item_dim + n_brands + n_colors; }
  void validate() const;
};

/// Generates n_groups base query groups split 80/10/10 by group-id hash
/// (siblings from perms_per_group > 1 always land in the same split).
Dataset generate(const SyntheticWorldConfig& cfg, const IpsOracle& oracle,
                 const BehavioralUserConfig& behavioral, int n_groups);

}  // namespace permurank
