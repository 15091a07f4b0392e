#include "permurank/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "permurank/errors.hpp"
#include "permurank/optimizer.hpp"
#include "permurank/parallel.hpp"
#include "permurank/soft_permutation.hpp"
#include "permurank/user_oracles.hpp"

namespace permurank {

namespace {

std::vector<int> iota_vec(int n) {
  std::vector<int> v(n);
  std::iota(v.begin(), v.end(), 0);
  return v;
}

void shuffle_indices(std::vector<int>& idx, Rng& rng) {
  for (int i = static_cast<int>(idx.size()) - 1; i > 0; --i) {
    int j = rng.uniform_int(i + 1);
    std::swap(idx[i], idx[j]);
  }
}

double maybe_decayed_lr(const TrainConfig& cfg, int epoch) {
  return epoch > cfg.lr_decay_epoch ? cfg.learning_rate * 0.5 : cfg.learning_rate;
}

std::vector<double> dcg_discounts(int n) {
  std::vector<double> d(n);
  for (int k = 0; k < n; ++k) d[k] = 1.0 / std::log2(static_cast<double>(k) + 2.0);
  return d;
}

/// Per-item gains for the Naive objective: the position-free relevance
/// factor of the click model.
std::vector<double> naive_gains(const QueryGroup& g) {
  std::vector<double> gains(g.rel_logits.size());
  for (std::size_t i = 0; i < gains.size(); ++i) gains[i] = sigmoid_scalar(g.rel_logits[i]);
  return gains;
}

}  // namespace

Var relaxed_ndcg_loss(Var scores, const std::vector<double>& gains, double tau) {
  int n = static_cast<int>(gains.size());
  if (scores.value().rows() != n) {
    throw std::invalid_argument("relaxed_ndcg_loss: scores/gains length mismatch");
  }
  for (double g : gains) {
    if (g < 0.0) throw std::invalid_argument("relaxed_ndcg_loss: negative gain");
  }
  Tape& t = *scores.tape;

  std::vector<double> sorted = gains;
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());
  std::vector<double> disc = dcg_discounts(n);
  double ideal = 0.0;
  for (int k = 0; k < n; ++k) ideal += sorted[k] * disc[k];
  if (ideal == 0.0) return t.constant(Tensor::scalar(0.0));

  Var pi = softsort_matrix(scores, tau);
  Var soft_gains = matmul(pi, t.constant(Tensor::column(gains)));  // gain mass per position
  Var soft_dcg = sum(mul(soft_gains, t.constant(Tensor::column(disc))));
  return add_scalar(scale(soft_dcg, -1.0 / ideal), 1.0);
}

std::pair<RankerParams, TrainReport> train_naive(const std::vector<QueryGroup>& train,
                                                 const std::vector<QueryGroup>& val,
                                                 const EncoderConfig& enc_cfg,
                                                 const TrainConfig& cfg) {
  cfg.validate();
  if (train.empty() || val.empty()) throw std::invalid_argument("train_naive: empty dataset");

  Rng rng(cfg.seed);
  const QueryGroup& probe = train.front();
  ModelDims dims{static_cast<int>(probe.query.size()), probe.items.cols(), 0};
  RankerParams params = init_ranker(enc_cfg, dims, rng);
  AdamW opt(cfg.learning_rate, cfg.weight_decay);
  TrainReport report;

  RankerParams best = params;
  double best_val = std::numeric_limits<double>::infinity();

  auto group_loss = [&](Tape& tape, const RankerVars& rv, const QueryGroup& g) {
    Var scores = ranker_forward(tape, rv, g.query, tape.constant(g.items));
    return relaxed_ndcg_loss(scores, naive_gains(g), cfg.tau);
  };

  std::vector<int> order = iota_vec(static_cast<int>(train.size()));
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    opt.set_lr(maybe_decayed_lr(cfg, epoch));
    shuffle_indices(order, rng);

    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      std::size_t end = std::min(order.size(), start + cfg.batch_size);
      int batch_n = static_cast<int>(end - start);
      std::vector<std::vector<Tensor>> grads(batch_n);
      std::vector<double> losses(batch_n);
      parallel_for(batch_n, cfg.workers, [&](int i) {
        const QueryGroup& g = train[order[start + i]];
        Tape tape;
        RankerVars rv = bind_ranker(tape, params);
        Var loss = group_loss(tape, rv, g);
        tape.backward(loss);
        losses[i] = loss.value().scalar_value();
        for (Var v : collect_vars(rv)) grads[i].push_back(tape.grad(v));
      });
      double batch_loss = std::accumulate(losses.begin(), losses.end(), 0.0);
      if (!std::isfinite(batch_loss)) throw TrainingFailure("train_naive: non-finite loss", epoch);
      epoch_loss += batch_loss;

      double inv = 1.0 / batch_n;
      std::size_t idx = 0;
      visit_params(params, [&](const std::string&, Tensor& t) {
        Tensor sum = Tensor::zeros(t.shape());
        for (int i = 0; i < batch_n; ++i) {
          const Tensor& gi = grads[i][idx];
          for (std::size_t c = 0; c < sum.numel(); ++c) sum[c] += gi[c];
        }
        for (std::size_t c = 0; c < sum.numel(); ++c) sum[c] *= inv;
        opt.step(t, sum);
        ++idx;
      });
      opt.next_step();
    }
    report.train_loss.push_back(epoch_loss / static_cast<double>(train.size()));

    std::vector<double> vloss(val.size());
    parallel_for(static_cast<int>(val.size()), cfg.workers, [&](int i) {
      Tape tape;
      RankerVars rv = bind_ranker(tape, params, /*as_constant=*/true);
      vloss[i] = group_loss(tape, rv, val[i]).value().scalar_value();
    });
    double val_loss = std::accumulate(vloss.begin(), vloss.end(), 0.0) / val.size();
    report.val_loss.push_back(val_loss);
    report.val_mean_reward.push_back(0.0);
    if (val_loss < best_val) {
      best_val = val_loss;
      best = params;
      report.best_epoch = epoch;
    }
  }
  return {std::move(best), std::move(report)};
}

// --- Plackett-Luce ---

void PlackettLuceSampler::validate() const {
  if (sample_count < 1) throw std::invalid_argument("PlackettLuceSampler: K must be >= 1");
  if (!(temperature > 0.0)) {
    throw std::invalid_argument("PlackettLuceSampler: temperature must be > 0");
  }
}

double pl_log_prob(const std::vector<double>& scores, const std::vector<int>& order) {
  int n = static_cast<int>(order.size());
  double lp = 0.0;
  for (int k = 0; k < n; ++k) {
    double mx = -std::numeric_limits<double>::infinity();
    for (int j = k; j < n; ++j) mx = std::max(mx, scores[order[j]]);
    double z = 0.0;
    for (int j = k; j < n; ++j) z += std::exp(scores[order[j]] - mx);
    lp += scores[order[k]] - (mx + std::log(z));
  }
  return lp;
}

Var pl_log_prob_node(Var scores, const std::vector<int>& order) {
  int n = static_cast<int>(order.size());
  Tape& t = *scores.tape;
  Var lp = t.constant(Tensor::scalar(0.0));
  for (int k = 0; k < n; ++k) {
    std::vector<int> suffix(order.begin() + k, order.end());
    Var chosen = select_rows(scores, {order[k]});
    Var rest = select_rows(scores, suffix);
    lp = add(lp, sub(sum(chosen), logsumexp(rest)));
  }
  return lp;
}

std::vector<int> pl_sample(const PlackettLuceSampler& sampler,
                           const std::vector<double>& scores, Rng& rng) {
  sampler.validate();
  std::vector<double> keys(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    keys[i] = scores[i] / sampler.temperature + rng.gumbel();
  }
  return hard_permutation(keys);
}

PgStep pg_rank_step(const RankerParams& ranker, const RewardParams& frozen_reward,
                    const QueryGroup& group, const PlackettLuceSampler& sampler, Rng& rng) {
  sampler.validate();
  int k_samples = sampler.sample_count;

  Tape tape;
  RankerVars rv = bind_ranker(tape, ranker);
  Var scores = ranker_forward(tape, rv, group.query, tape.constant(group.items));
  const Tensor& sv = scores.value();
  std::vector<double> score_vals(sv.data(), sv.data() + sv.rows());

  std::vector<std::vector<int>> perms(k_samples);
  std::vector<double> rewards(k_samples);
  for (int k = 0; k < k_samples; ++k) {
    perms[k] = pl_sample(sampler, score_vals, rng);
    rewards[k] = reward_value(frozen_reward, group.query, group.items, perms[k]);
  }

  PgStep step;
  step.mean_reward =
      std::accumulate(rewards.begin(), rewards.end(), 0.0) / static_cast<double>(k_samples);

  // Policy logits are scores/temperature; leave-one-out baseline per sample.
  Var logits = scale(scores, 1.0 / sampler.temperature);
  Var objective = tape.constant(Tensor::scalar(0.0));
  double reward_sum = std::accumulate(rewards.begin(), rewards.end(), 0.0);
  for (int k = 0; k < k_samples; ++k) {
    double baseline =
        k_samples > 1 ? (reward_sum - rewards[k]) / static_cast<double>(k_samples - 1) : 0.0;
    double advantage = rewards[k] - baseline;
    objective = add(objective, scale(pl_log_prob_node(logits, perms[k]), advantage));
  }
  Var loss = scale(objective, -1.0 / static_cast<double>(k_samples));
  tape.backward(loss);
  for (Var v : collect_vars(rv)) step.grads.push_back(tape.grad(v));
  return step;
}

std::pair<RankerParams, TrainReport> train_pg_rank(const std::vector<QueryGroup>& train,
                                                   const std::vector<QueryGroup>& val,
                                                   const RewardParams& frozen_reward,
                                                   const EncoderConfig& enc_cfg,
                                                   const TrainConfig& cfg,
                                                   const PlackettLuceSampler& sampler) {
  cfg.validate();
  sampler.validate();
  if (train.empty() || val.empty()) throw std::invalid_argument("train_pg_rank: empty dataset");

  Rng rng(cfg.seed);
  const QueryGroup& probe = train.front();
  ModelDims dims{static_cast<int>(probe.query.size()), probe.items.cols(), 0};
  RankerParams params = init_ranker(enc_cfg, dims, rng);
  AdamW opt(cfg.learning_rate, cfg.weight_decay);
  TrainReport report;

  RankerParams best = params;
  double best_val = -std::numeric_limits<double>::infinity();

  std::vector<int> order = iota_vec(static_cast<int>(train.size()));
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    opt.set_lr(maybe_decayed_lr(cfg, epoch));
    shuffle_indices(order, rng);

    double epoch_reward = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      std::size_t end = std::min(order.size(), start + cfg.batch_size);
      int batch_n = static_cast<int>(end - start);
      std::vector<PgStep> steps(batch_n);
      // Per-group streams keep sampling deterministic across worker counts.
      parallel_for(batch_n, cfg.workers, [&](int i) {
        const QueryGroup& g = train[order[start + i]];
        Rng group_rng = Rng::stream(cfg.seed ^ (0xb5ull + static_cast<unsigned>(epoch)),
                                    static_cast<std::uint64_t>(g.group_id));
        steps[i] = pg_rank_step(params, frozen_reward, g, sampler, group_rng);
      });
      double batch_reward = 0.0;
      for (const PgStep& s : steps) batch_reward += s.mean_reward;
      if (!std::isfinite(batch_reward)) {
        throw TrainingFailure("train_pg_rank: non-finite reward", epoch);
      }
      epoch_reward += batch_reward;

      double inv = 1.0 / batch_n;
      std::size_t idx = 0;
      visit_params(params, [&](const std::string&, Tensor& t) {
        Tensor sum = Tensor::zeros(t.shape());
        for (int i = 0; i < batch_n; ++i) {
          const Tensor& gi = steps[i].grads[idx];
          for (std::size_t c = 0; c < sum.numel(); ++c) sum[c] += gi[c];
        }
        for (std::size_t c = 0; c < sum.numel(); ++c) sum[c] *= inv;
        opt.step(t, sum);
        ++idx;
      });
      opt.next_step();
    }
    report.train_loss.push_back(-epoch_reward / static_cast<double>(train.size()));

    // Validation: reward of the greedy (hard) ranking.
    std::vector<double> vg(val.size());
    parallel_for(static_cast<int>(val.size()), cfg.workers, [&](int i) {
      std::vector<double> scores = ranker_scores(params, val[i].query, val[i].items);
      vg[i] = reward_value(frozen_reward, val[i].query, val[i].items,
                           hard_permutation(scores));
    });
    double val_g = std::accumulate(vg.begin(), vg.end(), 0.0) / val.size();
    report.val_loss.push_back(-val_g);
    report.val_mean_reward.push_back(val_g);
    if (val_g > best_val) {
      best_val = val_g;
      best = params;
      report.best_epoch = epoch;
    }
  }
  return {std::move(best), std::move(report)};
}

// --- Pairwise swap baseline ---

double urcc_pair_loss(double s_plus, double s_minus) {
  double x = -(s_plus - s_minus);
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

std::vector<std::vector<int>> enumerate_swap_permutations(const std::vector<int>& base) {
  int n = static_cast<int>(base.size());
  std::vector<std::vector<int>> out;
  out.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      std::vector<int> p = base;
      std::swap(p[i], p[j]);
      out.push_back(std::move(p));
    }
  }
  return out;
}

std::pair<RankerParams, TrainReport> train_urcc(const std::vector<QueryGroup>& train,
                                                const std::vector<QueryGroup>& val,
                                                const RewardParams& frozen_reward,
                                                const EncoderConfig& enc_cfg,
                                                const TrainConfig& cfg,
                                                std::optional<RankerParams> init) {
  cfg.validate();
  if (train.empty() || val.empty()) throw std::invalid_argument("train_urcc: empty dataset");

  Rng rng(cfg.seed);
  const QueryGroup& probe = train.front();
  ModelDims dims{static_cast<int>(probe.query.size()), probe.items.cols(), 0};
  RankerParams params = init ? std::move(*init) : init_ranker(enc_cfg, dims, rng);
  AdamW opt(cfg.learning_rate, cfg.weight_decay);
  TrainReport report;

  RankerParams best = params;
  double best_val = -std::numeric_limits<double>::infinity();

  struct GroupOut {
    std::vector<Tensor> grads;
    double loss = 0.0;
  };

  auto group_step = [&](const QueryGroup& g, bool with_grad, GroupOut& out) {
    Tape tape;
    RankerVars rv = bind_ranker(tape, params, /*as_constant=*/!with_grad);
    Var logits = ranker_logits(tape, rv, g.query, tape.constant(g.items));
    const Tensor& lv = logits.value();
    std::vector<double> logit_vals(lv.data(), lv.data() + lv.rows());
    std::vector<int> base = hard_permutation(logit_vals);

    double g_base = reward_value(frozen_reward, g.query, g.items, base);
    std::vector<std::vector<int>> swaps = enumerate_swap_permutations(base);

    Var loss = tape.constant(Tensor::scalar(0.0));
    double pair_count = 0.0;
    int pair_idx = 0;
    for (int i = 0; i < g.size(); ++i) {
      for (int j = i + 1; j < g.size(); ++j, ++pair_idx) {
        double g_swap = reward_value(frozen_reward, g.query, g.items, swaps[pair_idx]);
        if (g_swap == g_base) continue;  // no preference, no pair
        // Items at the swapped positions, ordered as the preferred
        // permutation presents them: x ranks above y.
        bool swap_preferred = g_swap > g_base;
        int x = swap_preferred ? base[j] : base[i];
        int y = swap_preferred ? base[i] : base[j];
        double weight = std::abs(g_swap - g_base);
        Var margin = sub(select_rows(logits, {x}), select_rows(logits, {y}));
        loss = add(loss, scale(sum(softplus(scale(margin, -1.0))), weight));
        pair_count += 1.0;
      }
    }
    if (pair_count > 0.0) loss = scale(loss, 1.0 / pair_count);
    out.loss = loss.value().scalar_value();
    if (with_grad) {
      tape.backward(loss);
      for (Var v : collect_vars(rv)) out.grads.push_back(tape.grad(v));
    }
  };

  std::vector<int> order = iota_vec(static_cast<int>(train.size()));
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    opt.set_lr(maybe_decayed_lr(cfg, epoch));
    shuffle_indices(order, rng);

    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      std::size_t end = std::min(order.size(), start + cfg.batch_size);
      int batch_n = static_cast<int>(end - start);
      std::vector<GroupOut> outs(batch_n);
      parallel_for(batch_n, cfg.workers, [&](int i) {
        group_step(train[order[start + i]], /*with_grad=*/true, outs[i]);
      });
      double batch_loss = 0.0;
      for (const GroupOut& o : outs) batch_loss += o.loss;
      if (!std::isfinite(batch_loss)) throw TrainingFailure("train_urcc: non-finite loss", epoch);
      epoch_loss += batch_loss;

      double inv = 1.0 / batch_n;
      std::size_t idx = 0;
      visit_params(params, [&](const std::string&, Tensor& t) {
        Tensor sum = Tensor::zeros(t.shape());
        for (int i = 0; i < batch_n; ++i) {
          const Tensor& gi = outs[i].grads[idx];
          for (std::size_t c = 0; c < sum.numel(); ++c) sum[c] += gi[c];
        }
        for (std::size_t c = 0; c < sum.numel(); ++c) sum[c] *= inv;
        opt.step(t, sum);
        ++idx;
      });
      opt.next_step();
    }
    report.train_loss.push_back(epoch_loss / static_cast<double>(train.size()));

    std::vector<double> vg(val.size());
    parallel_for(static_cast<int>(val.size()), cfg.workers, [&](int i) {
      std::vector<double> scores = ranker_scores(params, val[i].query, val[i].items);
      vg[i] = reward_value(frozen_reward, val[i].query, val[i].items,
                           hard_permutation(scores));
    });
    double val_g = std::accumulate(vg.begin(), vg.end(), 0.0) / val.size();
    report.val_loss.push_back(-val_g);
    report.val_mean_reward.push_back(val_g);
    if (val_g > best_val) {
      best_val = val_g;
      best = params;
      report.best_epoch = epoch;
    }
  }
  return {std::move(best), std::move(report)};
}

}  // namespace permurank
