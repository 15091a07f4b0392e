#pragma once

#include <optional>
#include <vector>

#include "permurank/training.hpp"

namespace permurank {

// --- Relaxed listwise objective (the Naive baseline) ---

/// 1 - softDCG/idealDCG over the soft permutation of the scores. gains must
/// be non-negative; all-zero gains define the loss as 0.
Var relaxed_ndcg_loss(Var scores, const std::vector<double>& gains, double tau);

/// Naive baseline: trained directly on per-item relevance gains with the
/// relaxed objective; never touches the reward model.
std::pair<RankerParams, TrainReport> train_naive(const std::vector<QueryGroup>& train,
                                                 const std::vector<QueryGroup>& val,
                                                 const EncoderConfig& enc_cfg,
                                                 const TrainConfig& cfg);

// --- Plackett-Luce policy gradient (pgrank baseline) ---

struct PlackettLuceSampler {
  double temperature = 0.1;  // Gumbel temperature
  int sample_count = 10;     // K

  void validate() const;
};

/// log P(pi | scores) under the Plackett-Luce model, log-sum-exp stabilized.
double pl_log_prob(const std::vector<double>& scores, const std::vector<int>& order);

/// Tape-node version used inside trainers; scores is an L x 1 column.
Var pl_log_prob_node(Var scores, const std::vector<int>& order);

/// Exact Plackett-Luce sample over scores/temperature via Gumbel argsort.
std::vector<int> pl_sample(const PlackettLuceSampler& sampler,
                           const std::vector<double>& scores, Rng& rng);

/// One REINFORCE step for a group: K sampled permutations scored by the
/// frozen reward (hard position rows), leave-one-out baseline, gradient of
/// the ranker parameters in visit order. Also reports the mean sampled
/// reward.
struct PgStep {
  std::vector<Tensor> grads;  // d(-objective)/d(theta), visit order
  double mean_reward = 0.0;
};
PgStep pg_rank_step(const RankerParams& ranker, const RewardParams& frozen_reward,
                    const QueryGroup& group, const PlackettLuceSampler& sampler, Rng& rng);

std::pair<RankerParams, TrainReport> train_pg_rank(const std::vector<QueryGroup>& train,
                                                   const std::vector<QueryGroup>& val,
                                                   const RewardParams& frozen_reward,
                                                   const EncoderConfig& enc_cfg,
                                                   const TrainConfig& cfg,
                                                   const PlackettLuceSampler& sampler);

// --- Pairwise swap baseline (urcc) ---

/// log(1 + exp(-(s_plus - s_minus))) on frozen-reward scores of a preference
/// pair; strictly decreasing in the gap.
double urcc_pair_loss(double s_plus, double s_minus);

/// All C(L,2) single-swap variants of a base ranking.
std::vector<std::vector<int>> enumerate_swap_permutations(const std::vector<int>& base);

/// Pairwise swap trainer: every step scores the base ranking and all swap
/// candidates with the frozen reward, orients each pair by reward, and pushes
/// the ranker's item logits toward the preferred orderings with a
/// reward-gap-weighted logistic loss. init may come from a pretrained
/// checkpoint (the intended configuration) or be empty for from-scratch.
std::pair<RankerParams, TrainReport> train_urcc(const std::vector<QueryGroup>& train,
                                                const std::vector<QueryGroup>& val,
                                                const RewardParams& frozen_reward,
                                                const EncoderConfig& enc_cfg,
                                                const TrainConfig& cfg,
                                                std::optional<RankerParams> init);

}  // namespace permurank
