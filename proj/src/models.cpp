#include "permurank/models.hpp"

#include <stdexcept>

#include "permurank/soft_permutation.hpp"

namespace permurank {

namespace {

Tensor normal_init(std::vector<int> shape, double stddev, Rng& rng) {
  Tensor t = Tensor::zeros(std::move(shape));
  for (std::size_t i = 0; i < t.numel(); ++i) t[i] = rng.normal(0.0, stddev);
  return t;
}

}  // namespace

RewardParams init_reward(const EncoderConfig& cfg, const ModelDims& dims, Rng& rng) {
  cfg.validate();
  if (dims.query_dim < 1 || dims.item_dim < 1 || dims.max_len < 1) {
    throw std::invalid_argument("init_reward: invalid dims");
  }
  RewardParams p;
  p.cfg = cfg;
  p.cfg.use_cls = true;
  p.dims = dims;
  p.proj_w = xavier_uniform(dims.query_dim + dims.item_dim, cfg.width, rng);
  p.proj_b = Tensor::zeros({1, cfg.width});
  p.encoder = init_encoder(cfg, rng);
  p.cls = normal_init({1, cfg.width}, 0.02, rng);
  p.pos_table = normal_init({dims.max_len, cfg.width}, 0.02, rng);
  p.readout = xavier_uniform(cfg.width, 1, rng);
  return p;
}

RankerParams init_ranker(const EncoderConfig& cfg, const ModelDims& dims, Rng& rng) {
  cfg.validate();
  if (dims.query_dim < 1 || dims.item_dim < 1) {
    throw std::invalid_argument("init_ranker: invalid dims");
  }
  RankerParams p;
  p.cfg = cfg;
  p.cfg.use_cls = false;
  p.dims = dims;
  p.proj_w = xavier_uniform(dims.query_dim + dims.item_dim, cfg.width, rng);
  p.proj_b = Tensor::zeros({1, cfg.width});
  p.encoder = init_encoder(cfg, rng);
  p.readout = xavier_uniform(cfg.width, 1, rng);
  return p;
}

RewardVars bind_reward(Tape& tape, const RewardParams& p, bool as_constant) {
  auto bind = [&](const Tensor& t) { return as_constant ? tape.constant(t) : tape.leaf(t); };
  RewardVars rv;
  rv.cfg = &p.cfg;
  rv.proj_w = bind(p.proj_w);
  rv.proj_b = bind(p.proj_b);
  rv.encoder = bind_encoder(tape, p.encoder, as_constant);
  rv.cls = bind(p.cls);
  rv.pos_table = bind(p.pos_table);
  rv.readout = bind(p.readout);
  return rv;
}

RankerVars bind_ranker(Tape& tape, const RankerParams& p, bool as_constant) {
  auto bind = [&](const Tensor& t) { return as_constant ? tape.constant(t) : tape.leaf(t); };
  RankerVars rv;
  rv.cfg = &p.cfg;
  rv.proj_w = bind(p.proj_w);
  rv.proj_b = bind(p.proj_b);
  rv.encoder = bind_encoder(tape, p.encoder, as_constant);
  rv.readout = bind(p.readout);
  return rv;
}

namespace {

/// Hands out pre-made leaves in visit_params order.
struct VarCursor {
  const std::vector<Var>* vars;
  std::size_t next = 0;
  Var take() {
    if (next >= vars->size()) throw std::invalid_argument("bind_with: too few vars");
    return (*vars)[next++];
  }
};

EncoderVars encoder_from_cursor(const EncoderParams& p, VarCursor& c) {
  EncoderVars ev;
  ev.layers.reserve(p.layers.size());
  for (std::size_t i = 0; i < p.layers.size(); ++i) {
    EncoderLayerVars lv;
    lv.ln1_gain = c.take();
    lv.ln1_bias = c.take();
    lv.wq = c.take();
    lv.bq = c.take();
    lv.wk = c.take();
    lv.bk = c.take();
    lv.wv = c.take();
    lv.bv = c.take();
    lv.wo = c.take();
    lv.bo = c.take();
    lv.ln2_gain = c.take();
    lv.ln2_bias = c.take();
    lv.w1 = c.take();
    lv.b1 = c.take();
    lv.w2 = c.take();
    lv.b2 = c.take();
    ev.layers.push_back(lv);
  }
  ev.final_gain = c.take();
  ev.final_bias = c.take();
  return ev;
}

}  // namespace

RewardVars bind_reward_with(Tape& tape, const RewardParams& p, const std::vector<Var>& vars) {
  (void)tape;
  VarCursor c{&vars};
  RewardVars rv;
  rv.cfg = &p.cfg;
  rv.proj_w = c.take();
  rv.proj_b = c.take();
  rv.encoder = encoder_from_cursor(p.encoder, c);
  rv.cls = c.take();
  rv.pos_table = c.take();
  rv.readout = c.take();
  return rv;
}

RankerVars bind_ranker_with(Tape& tape, const RankerParams& p, const std::vector<Var>& vars) {
  (void)tape;
  VarCursor c{&vars};
  RankerVars rv;
  rv.cfg = &p.cfg;
  rv.proj_w = c.take();
  rv.proj_b = c.take();
  rv.encoder = encoder_from_cursor(p.encoder, c);
  rv.readout = c.take();
  return rv;
}

std::vector<Var> collect_vars(const RewardVars& rv) {
  std::vector<Var> out{rv.proj_w, rv.proj_b};
  collect_encoder_vars(rv.encoder, out);
  out.push_back(rv.cls);
  out.push_back(rv.pos_table);
  out.push_back(rv.readout);
  return out;
}

std::vector<Var> collect_vars(const RankerVars& rv) {
  std::vector<Var> out{rv.proj_w, rv.proj_b};
  collect_encoder_vars(rv.encoder, out);
  out.push_back(rv.readout);
  return out;
}

Var embed_group(Tape& tape, Var proj_w, Var proj_b, const std::vector<double>& query,
                Var items) {
  const Tensor& it = items.value();
  if (it.rank() != 2) throw std::invalid_argument("embed_group: items must be L x item_dim");
  int n_items = it.rows();
  int qd = static_cast<int>(query.size());
  if (qd + it.cols() != proj_w.value().rows()) {
    throw std::invalid_argument("embed_group: projection input dim mismatch");
  }
  Tensor q_rep = Tensor::zeros({n_items, qd});
  for (int i = 0; i < n_items; ++i)
    for (int j = 0; j < qd; ++j) q_rep.at(i, j) = query[j];
  Var joined = concat_cols(tape.constant(std::move(q_rep)), items);
  return add_rowvec(matmul(joined, proj_w), proj_b);
}

Var reward_logit(Tape& tape, const RewardVars& rv, const std::vector<double>& query,
                 Var items, Var pos_rows) {
  const Tensor& it = items.value();
  int n_items = it.rows();
  if (pos_rows.value().rows() != n_items || pos_rows.value().cols() != rv.cfg->width) {
    throw std::invalid_argument("reward_logit: pos_rows must be L x width");
  }
  Var embedded = embed_group(tape, rv.proj_w, rv.proj_b, query, items);
  Var tokens = concat_rows(rv.cls, add(embedded, pos_rows));
  Var encoded = encoder_forward(rv.encoder, tokens, *rv.cfg);
  Var cls_out = select_rows(encoded, {0});
  return matmul(cls_out, rv.readout);
}

Var ranker_logits(Tape& tape, const RankerVars& rv, const std::vector<double>& query,
                  Var items) {
  Var embedded = embed_group(tape, rv.proj_w, rv.proj_b, query, items);
  Var encoded = encoder_forward(rv.encoder, embedded, *rv.cfg);
  return matmul(encoded, rv.readout);
}

Var hard_position_rows(Var pos_table, const std::vector<int>& order) {
  int n = static_cast<int>(order.size());
  if (pos_table.value().rows() < n) {
    throw std::invalid_argument("hard_position_rows: group longer than the position table");
  }
  return select_rows(pos_table, invert_permutation(order));
}

std::vector<double> ranker_scores(const RankerParams& p, const std::vector<double>& query,
                                  const Tensor& items) {
  Tape tape;
  RankerVars rv = bind_ranker(tape, p, /*as_constant=*/true);
  Var scores = ranker_forward(tape, rv, query, tape.constant(items));
  const Tensor& s = scores.value();
  return std::vector<double>(s.data(), s.data() + s.rows());
}

double reward_value(const RewardParams& p, const std::vector<double>& query,
                    const Tensor& items, const std::vector<int>& order) {
  Tape tape;
  RewardVars rv = bind_reward(tape, p, /*as_constant=*/true);
  Var pos_rows = hard_position_rows(rv.pos_table, order);
  Var g = reward_forward(tape, rv, query, tape.constant(items), pos_rows);
  return g.value().scalar_value();
}

}  // namespace permurank
