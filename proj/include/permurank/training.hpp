#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "permurank/dataset.hpp"
#include "permurank/models.hpp"

namespace permurank {

enum class LossKind { kCrossEntropy, kSquaredError };

std::string to_string(LossKind k);
LossKind loss_kind_from_string(const std::string& s);

struct TrainConfig {
  double learning_rate = 1e-3;
  double weight_decay = 1e-2;
  int epochs = 15;
  int batch_size = 32;
  double lambda = 0.0;   // misspecification weight strength
  double tau = 1.0;      // soft permutation temperature
  std::uint64_t seed = 0;
  bool use_ste = false;
  LossKind loss = LossKind::kSquaredError;
  int lr_decay_epoch = 10;  // halve the learning rate after this epoch
  int workers = 1;

  void validate() const;
};

/// Per-batch record of the weighted-objective bound (sum of w*g vs sum of g
/// over the batch, and the weight range seen).
struct BatchBound {
  double weighted_sum = 0.0;
  double unweighted_sum = 0.0;
  double min_weight = 1.0;
  double max_weight = 1.0;
};

struct TrainReport {
  std::vector<double> train_loss;        // one per epoch
  std::vector<double> val_loss;
  std::vector<double> val_mean_reward;   // mean predicted reward on held-out data
  int best_epoch = 0;                    // 1-based
  std::vector<BatchBound> batch_bounds;  // stage 2 only
};

void write_train_report_csv(const TrainReport& report, const std::string& path);

/// Stage 1: fits the utility model on logged (factual) permutations with
/// hard position rows. Returns the checkpoint with the best validation loss.
std::pair<RewardParams, TrainReport> train_reward(const std::vector<QueryGroup>& train,
                                                  const std::vector<QueryGroup>& val,
                                                  const EncoderConfig& enc_cfg,
                                                  const ModelDims& dims,
                                                  const TrainConfig& cfg);

/// Instance weight w = clamp(1 - lambda * |y - g_factual|, 0, 1). Detached:
/// no gradient flows into the reward model through w.
double misspec_weight(double label, double g_factual, double lambda);

/// Stage 2: maximizes the frozen reward of the ranker-induced soft
/// permutation, weighted by misspec_weight. Reward parameters are never
/// touched. Returns the checkpoint with the best validation objective.
std::pair<RankerParams, TrainReport> train_ranker(const std::vector<QueryGroup>& train,
                                                  const std::vector<QueryGroup>& val,
                                                  const RewardParams& frozen_reward,
                                                  const EncoderConfig& enc_cfg,
                                                  const TrainConfig& cfg);

}  // namespace permurank
