#include "permurank/training.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "permurank/errors.hpp"
#include "permurank/optimizer.hpp"
#include "permurank/parallel.hpp"
#include "permurank/rng.hpp"
#include "permurank/soft_permutation.hpp"

namespace permurank {

std::string to_string(LossKind k) {
  return k == LossKind::kCrossEntropy ? "cross_entropy" : "squared_error";
}

LossKind loss_kind_from_string(const std::string& s) {
  if (s == "cross_entropy") return LossKind::kCrossEntropy;
  if (s == "squared_error") return LossKind::kSquaredError;
  throw SchemaError("unknown loss kind '" + s + "'");
}

void TrainConfig::validate() const {
  if (epochs < 1) throw std::invalid_argument("TrainConfig: epochs must be >= 1");
  if (lambda < 0.0) throw std::invalid_argument("TrainConfig: lambda must be >= 0");
  if (!(tau > 0.0)) throw std::invalid_argument("TrainConfig: tau must be > 0");
  if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
  if (learning_rate <= 0.0) throw std::invalid_argument("TrainConfig: learning_rate <= 0");
}

void write_train_report_csv(const TrainReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw SchemaError("train report: cannot write " + path);
  out << "epoch,split,metric,value\n";
  out.precision(17);
  for (std::size_t e = 0; e < report.train_loss.size(); ++e) {
    out << (e + 1) << ",train,loss," << report.train_loss[e] << "\n";
    out << (e + 1) << ",val,loss," << report.val_loss[e] << "\n";
    out << (e + 1) << ",val,mean_reward," << report.val_mean_reward[e] << "\n";
  }
  out << "0,val,best_epoch," << report.best_epoch << "\n";
}

double misspec_weight(double label, double g_factual, double lambda) {
  double w = 1.0 - lambda * std::abs(label - g_factual);
  return std::clamp(w, 0.0, 1.0);
}

namespace {

std::vector<int> position_identity(int n) {
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  return idx;
}

void shuffle_indices(std::vector<int>& idx, Rng& rng) {
  for (int i = static_cast<int>(idx.size()) - 1; i > 0; --i) {
    int j = rng.uniform_int(i + 1);
    std::swap(idx[i], idx[j]);
  }
}

/// Per-group gradient in visit order plus the scalar loss value.
struct GroupGrad {
  std::vector<Tensor> grads;
  double loss = 0.0;
  double g_value = 0.0;  // stage 2: predicted reward of the soft permutation
  double weight = 1.0;
};

Var stage1_loss(Tape& tape, const RewardVars& rv, const QueryGroup& g, LossKind kind) {
  Var items = tape.constant(g.items);
  Var pos_rows = hard_position_rows(rv.pos_table, g.logged_perm);
  Var logit = reward_logit(tape, rv, g.query, items, pos_rows);
  if (kind == LossKind::kCrossEntropy) {
    // softplus(z) - y z is the stable binary cross entropy in the logit
    return sub(softplus(logit), scale(logit, g.label));
  }
  Var diff = add_scalar(sigmoid(logit), -g.label);
  return mul(diff, diff);
}

template <typename BindFn, typename LossFn>
GroupGrad group_gradient(const BindFn& bind, const LossFn& loss_fn) {
  Tape tape;
  auto vars = bind(tape);
  GroupGrad out;
  Var loss = loss_fn(tape, vars, out);
  tape.backward(loss);
  out.loss = loss.value().scalar_value();
  std::vector<Var> ordered = collect_vars(vars);
  out.grads.reserve(ordered.size());
  for (Var v : ordered) out.grads.push_back(tape.grad(v));
  return out;
}

template <typename Params>
void apply_mean_grads(Params& params, const std::vector<GroupGrad>& grads, AdamW& opt) {
  if (grads.empty()) return;
  double inv = 1.0 / static_cast<double>(grads.size());
  std::size_t idx = 0;
  visit_params(params, [&](const std::string&, Tensor& t) {
    Tensor sum = Tensor::zeros(t.shape());
    for (const GroupGrad& g : grads) {
      const Tensor& gi = g.grads[idx];
      for (std::size_t i = 0; i < sum.numel(); ++i) sum[i] += gi[i];
    }
    for (std::size_t i = 0; i < sum.numel(); ++i) sum[i] *= inv;
    opt.step(t, sum);
    ++idx;
  });
  opt.next_step();
}

double maybe_decayed_lr(const TrainConfig& cfg, int epoch) {
  return epoch > cfg.lr_decay_epoch ? cfg.learning_rate * 0.5 : cfg.learning_rate;
}

}  // namespace

std::pair<RewardParams, TrainReport> train_reward(const std::vector<QueryGroup>& train,
                                                  const std::vector<QueryGroup>& val,
                                                  const EncoderConfig& enc_cfg,
                                                  const ModelDims& dims,
                                                  const TrainConfig& cfg) {
  cfg.validate();
  if (train.empty() || val.empty()) {
    throw std::invalid_argument("train_reward: empty dataset");
  }
  if (cfg.loss == LossKind::kCrossEntropy) {
    for (const QueryGroup& g : train) {
      if (g.label != 0.0 && g.label != 1.0) {
        throw std::invalid_argument("train_reward: cross-entropy needs binary labels");
      }
    }
  }

  Rng rng(cfg.seed);
  RewardParams params = init_reward(enc_cfg, dims, rng);
  AdamW opt(cfg.learning_rate, cfg.weight_decay);
  TrainReport report;

  RewardParams best = params;
  double best_val = std::numeric_limits<double>::infinity();

  std::vector<int> order = position_identity(static_cast<int>(train.size()));
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    opt.set_lr(maybe_decayed_lr(cfg, epoch));
    shuffle_indices(order, rng);

    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      std::size_t end = std::min(order.size(), start + cfg.batch_size);
      int batch_n = static_cast<int>(end - start);
      std::vector<GroupGrad> grads(batch_n);
      parallel_for(batch_n, cfg.workers, [&](int i) {
        const QueryGroup& g = train[order[start + i]];
        grads[i] = group_gradient(
            [&](Tape& t) { return bind_reward(t, params); },
            [&](Tape& t, const RewardVars& rv, GroupGrad&) {
              return stage1_loss(t, rv, g, cfg.loss);
            });
      });
      double batch_loss = 0.0;
      for (const GroupGrad& g : grads) batch_loss += g.loss;
      if (!std::isfinite(batch_loss)) throw TrainingFailure("train_reward: non-finite loss", epoch);
      epoch_loss += batch_loss;
      apply_mean_grads(params, grads, opt);
    }
    report.train_loss.push_back(epoch_loss / static_cast<double>(train.size()));

    // Validation pass: loss and mean predicted reward on factual orders.
    std::vector<double> vloss(val.size()), vreward(val.size());
    parallel_for(static_cast<int>(val.size()), cfg.workers, [&](int i) {
      Tape tape;
      RewardVars rv = bind_reward(tape, params, /*as_constant=*/true);
      Var items = tape.constant(val[i].items);
      Var pos_rows = hard_position_rows(rv.pos_table, val[i].logged_perm);
      Var logit = reward_logit(tape, rv, val[i].query, items, pos_rows);
      double z = logit.value().scalar_value();
      double g = sigmoid_scalar(z);
      vreward[i] = g;
      if (cfg.loss == LossKind::kCrossEntropy) {
        vloss[i] = std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))) - val[i].label * z;
      } else {
        vloss[i] = (g - val[i].label) * (g - val[i].label);
      }
    });
    double val_loss = std::accumulate(vloss.begin(), vloss.end(), 0.0) / val.size();
    double val_reward = std::accumulate(vreward.begin(), vreward.end(), 0.0) / val.size();
    report.val_loss.push_back(val_loss);
    report.val_mean_reward.push_back(val_reward);
    if (val_loss < best_val) {
      best_val = val_loss;
      best = params;
      report.best_epoch = epoch;
    }
  }
  return {std::move(best), std::move(report)};
}

namespace {

/// Predicted reward of every group's logged permutation; the reward model is
/// frozen, so one pass up front covers the whole run.
std::vector<double> factual_rewards(const std::vector<QueryGroup>& groups,
                                    const RewardParams& reward, int workers) {
  std::vector<double> out(groups.size());
  parallel_for(static_cast<int>(groups.size()), workers, [&](int i) {
    out[i] = reward_value(reward, groups[i].query, groups[i].items, groups[i].logged_perm);
  });
  return out;
}

/// Builds the stage-2 objective for one group: w * g(soft permutation).
/// Returns the loss -w*g; fills g_value/weight on the way out.
Var stage2_loss(Tape& tape, const RankerVars& rv, const RewardVars& rw,
                const QueryGroup& g, double g_factual, const TrainConfig& cfg,
                GroupGrad& out) {
  int n = g.size();
  Var items = tape.constant(g.items);
  Var scores = ranker_forward(tape, rv, g.query, items);
  Var pi = cfg.use_ste ? ste_matrix(scores, cfg.tau) : softsort_matrix(scores, cfg.tau);
  Var table = select_rows(rw.pos_table, position_identity(n));
  Var pos_rows = soft_position_embed(pi, table);
  Var reward = reward_forward(tape, rw, g.query, items, pos_rows);
  double w = misspec_weight(g.label, g_factual, cfg.lambda);
  out.g_value = reward.value().scalar_value();
  out.weight = w;
  return scale(reward, -w);
}

}  // namespace

std::pair<RankerParams, TrainReport> train_ranker(const std::vector<QueryGroup>& train,
                                                  const std::vector<QueryGroup>& val,
                                                  const RewardParams& frozen_reward,
                                                  const EncoderConfig& enc_cfg,
                                                  const TrainConfig& cfg) {
  cfg.validate();
  if (train.empty() || val.empty()) {
    throw std::invalid_argument("train_ranker: empty dataset");
  }

  Rng rng(cfg.seed);
  ModelDims dims{frozen_reward.dims.query_dim, frozen_reward.dims.item_dim, 0};
  RankerParams params = init_ranker(enc_cfg, dims, rng);
  AdamW opt(cfg.learning_rate, cfg.weight_decay);
  TrainReport report;

  std::vector<double> train_factual = factual_rewards(train, frozen_reward, cfg.workers);
  std::vector<double> val_factual = factual_rewards(val, frozen_reward, cfg.workers);

  RankerParams best = params;
  double best_val = -std::numeric_limits<double>::infinity();

  std::vector<int> order = position_identity(static_cast<int>(train.size()));
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    opt.set_lr(maybe_decayed_lr(cfg, epoch));
    shuffle_indices(order, rng);

    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      std::size_t end = std::min(order.size(), start + cfg.batch_size);
      int batch_n = static_cast<int>(end - start);
      std::vector<GroupGrad> grads(batch_n);
      parallel_for(batch_n, cfg.workers, [&](int i) {
        const QueryGroup& g = train[order[start + i]];
        grads[i] = group_gradient(
            [&](Tape& t) { return bind_ranker(t, params); },
            [&](Tape& t, const RankerVars& rv, GroupGrad& gg) {
              RewardVars rw = bind_reward(t, frozen_reward, /*as_constant=*/true);
              return stage2_loss(t, rv, rw, g, train_factual[order[start + i]], cfg, gg);
            });
      });
      BatchBound bound;
      double batch_loss = 0.0;
      for (const GroupGrad& g : grads) {
        batch_loss += g.loss;
        bound.weighted_sum += g.weight * g.g_value;
        bound.unweighted_sum += g.g_value;
        bound.min_weight = std::min(bound.min_weight, g.weight);
        bound.max_weight = std::max(bound.max_weight, g.weight);
      }
      if (!std::isfinite(batch_loss)) throw TrainingFailure("train_ranker: non-finite loss", epoch);
      epoch_loss += batch_loss;
      report.batch_bounds.push_back(bound);
      apply_mean_grads(params, grads, opt);
    }
    report.train_loss.push_back(epoch_loss / static_cast<double>(train.size()));

    // Validation objective: mean w * g of the soft permutation.
    std::vector<double> vobj(val.size()), vg(val.size());
    parallel_for(static_cast<int>(val.size()), cfg.workers, [&](int i) {
      Tape tape;
      RankerVars rv = bind_ranker(tape, params, /*as_constant=*/true);
      RewardVars rw = bind_reward(tape, frozen_reward, /*as_constant=*/true);
      GroupGrad gg;
      stage2_loss(tape, rv, rw, val[i], val_factual[i], cfg, gg);
      vg[i] = gg.g_value;
      vobj[i] = gg.weight * gg.g_value;
    });
    double val_obj = std::accumulate(vobj.begin(), vobj.end(), 0.0) / val.size();
    double val_g = std::accumulate(vg.begin(), vg.end(), 0.0) / val.size();
    report.val_loss.push_back(-val_obj);
    report.val_mean_reward.push_back(val_g);
    if (val_obj > best_val) {
      best_val = val_obj;
      best = params;
      report.best_epoch = epoch;
    }
  }
  return {std::move(best), std::move(report)};
}

}  // namespace permurank
