#pragma once

#include <string>
#include <vector>

#include "permurank/encoder.hpp"

namespace permurank {

struct ModelDims {
  int query_dim = 0;
  int item_dim = 0;
  int max_len = 0;  // position-table rows (reward model only)
};

/// Permutation-aware utility model g(q, items, pi). Order information enters
/// exclusively through the added position rows; attention itself treats the
/// tokens as an unordered set.
struct RewardParams {
  EncoderConfig cfg;
  ModelDims dims;
  Tensor proj_w, proj_b;   // (query_dim + item_dim) -> width
  EncoderParams encoder;
  Tensor cls;              // 1 x width
  Tensor pos_table;        // max_len x width
  Tensor readout;          // width x 1
};

/// Permutation-invariant scorer f(q, items) -> per-item scores in (0,1).
struct RankerParams {
  EncoderConfig cfg;
  ModelDims dims;          // max_len unused
  Tensor proj_w, proj_b;
  EncoderParams encoder;
  Tensor readout;          // width x 1
};

RewardParams init_reward(const EncoderConfig& cfg, const ModelDims& dims, Rng& rng);
RankerParams init_ranker(const EncoderConfig& cfg, const ModelDims& dims, Rng& rng);

template <typename F>
void visit_params(RewardParams& p, F&& f) {
  f("proj_w", p.proj_w);
  f("proj_b", p.proj_b);
  visit_encoder_params(p.encoder, "encoder", f);
  f("cls", p.cls);
  f("pos_table", p.pos_table);
  f("readout", p.readout);
}

template <typename F>
void visit_params(RankerParams& p, F&& f) {
  f("proj_w", p.proj_w);
  f("proj_b", p.proj_b);
  visit_encoder_params(p.encoder, "encoder", f);
  f("readout", p.readout);
}

struct RewardVars {
  const EncoderConfig* cfg;
  Var proj_w, proj_b;
  EncoderVars encoder;
  Var cls, pos_table, readout;
};

struct RankerVars {
  const EncoderConfig* cfg;
  Var proj_w, proj_b;
  EncoderVars encoder;
  Var readout;
};

RewardVars bind_reward(Tape& tape, const RewardParams& p, bool as_constant = false);
RankerVars bind_ranker(Tape& tape, const RankerParams& p, bool as_constant = false);

/// Binds externally created leaves (in visit_params order) as the model
/// parameters; used by the finite-difference harness.
RewardVars bind_reward_with(Tape& tape, const RewardParams& p, const std::vector<Var>& vars);
RankerVars bind_ranker_with(Tape& tape, const RankerParams& p, const std::vector<Var>& vars);

/// Bound vars in visit_params order (for gradient collection).
std::vector<Var> collect_vars(const RewardVars& rv);
std::vector<Var> collect_vars(const RankerVars& rv);

/// e_l = proj(concat(q, item_l)); order-preserving per-row map.
Var embed_group(Tape& tape, Var proj_w, Var proj_b, const std::vector<double>& query,
                Var items);

/// Pre-sigmoid utility of a group given per-item position rows (hard rows
/// P[pi] in stage 1, soft mixtures Pi^T P in stage 2).
Var reward_logit(Tape& tape, const RewardVars& rv, const std::vector<double>& query,
                 Var items, Var pos_rows);

inline Var reward_forward(Tape& tape, const RewardVars& rv, const std::vector<double>& query,
                          Var items, Var pos_rows) {
  return sigmoid(reward_logit(tape, rv, query, items, pos_rows));
}

/// Pre-sigmoid per-item scores (L x 1).
Var ranker_logits(Tape& tape, const RankerVars& rv, const std::vector<double>& query,
                  Var items);

inline Var ranker_forward(Tape& tape, const RankerVars& rv, const std::vector<double>& query,
                          Var items) {
  return sigmoid(ranker_logits(tape, rv, query, items));
}

/// Hard position rows P[pi]: row l is the embedding of the position item l
/// occupies under the permutation (order[k] = item at rank k).
Var hard_position_rows(Var pos_table, const std::vector<int>& order);

/// Value-only ranker scores for a group.
std::vector<double> ranker_scores(const RankerParams& p, const std::vector<double>& query,
                                  const Tensor& items);

/// Value-only reward for a group under a hard permutation.
double reward_value(const RewardParams& p, const std::vector<double>& query,
                    const Tensor& items, const std::vector<int>& order);

}  // namespace permurank
