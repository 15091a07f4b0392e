#include "permurank/encoder.hpp"

#include <cmath>
#include <stdexcept>

namespace permurank {

void EncoderConfig::validate() const {
  if (depth < 1) throw std::invalid_argument("EncoderConfig: depth must be >= 1");
  if (width < 1 || heads < 1 || width % heads != 0) {
    throw std::invalid_argument("EncoderConfig: heads must divide width");
  }
  if (ffn_multiplier < 1) throw std::invalid_argument("EncoderConfig: ffn_multiplier < 1");
}

Tensor xavier_uniform(int fan_in, int fan_out, Rng& rng) {
  double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Tensor t = Tensor::zeros({fan_in, fan_out});
  for (std::size_t i = 0; i < t.numel(); ++i) t[i] = rng.uniform(-a, a);
  return t;
}

EncoderParams init_encoder(const EncoderConfig& cfg, Rng& rng) {
  cfg.validate();
  int d = cfg.width;
  int h = d * cfg.ffn_multiplier;
  EncoderParams p;
  p.layers.resize(cfg.depth);
  for (EncoderLayerParams& l : p.layers) {
    l.ln1_gain = Tensor::full({1, d}, 1.0);
    l.ln1_bias = Tensor::zeros({1, d});
    l.wq = xavier_uniform(d, d, rng);
    l.bq = Tensor::zeros({1, d});
    l.wk = xavier_uniform(d, d, rng);
    l.bk = Tensor::zeros({1, d});
    l.wv = xavier_uniform(d, d, rng);
    l.bv = Tensor::zeros({1, d});
    l.wo = xavier_uniform(d, d, rng);
    l.bo = Tensor::zeros({1, d});
    l.ln2_gain = Tensor::full({1, d}, 1.0);
    l.ln2_bias = Tensor::zeros({1, d});
    l.w1 = xavier_uniform(d, h, rng);
    l.b1 = Tensor::zeros({1, h});
    l.w2 = xavier_uniform(h, d, rng);
    l.b2 = Tensor::zeros({1, d});
  }
  p.final_gain = Tensor::full({1, d}, 1.0);
  p.final_bias = Tensor::zeros({1, d});
  return p;
}

EncoderVars bind_encoder(Tape& tape, const EncoderParams& p, bool as_constant) {
  auto bind = [&](const Tensor& t) {
    return as_constant ? tape.constant(t) : tape.leaf(t);
  };
  EncoderVars ev;
  ev.layers.reserve(p.layers.size());
  for (const EncoderLayerParams& l : p.layers) {
    EncoderLayerVars lv;
    lv.ln1_gain = bind(l.ln1_gain);
    lv.ln1_bias = bind(l.ln1_bias);
    lv.wq = bind(l.wq);
    lv.bq = bind(l.bq);
    lv.wk = bind(l.wk);
    lv.bk = bind(l.bk);
    lv.wv = bind(l.wv);
    lv.bv = bind(l.bv);
    lv.wo = bind(l.wo);
    lv.bo = bind(l.bo);
    lv.ln2_gain = bind(l.ln2_gain);
    lv.ln2_bias = bind(l.ln2_bias);
    lv.w1 = bind(l.w1);
    lv.b1 = bind(l.b1);
    lv.w2 = bind(l.w2);
    lv.b2 = bind(l.b2);
    ev.layers.push_back(lv);
  }
  ev.final_gain = bind(p.final_gain);
  ev.final_bias = bind(p.final_bias);
  return ev;
}

void collect_encoder_vars(const EncoderVars& ev, std::vector<Var>& out) {
  for (const EncoderLayerVars& l : ev.layers) {
    out.insert(out.end(), {l.ln1_gain, l.ln1_bias, l.wq, l.bq, l.wk, l.bk, l.wv, l.bv,
                           l.wo, l.bo, l.ln2_gain, l.ln2_bias, l.w1, l.b1, l.w2, l.b2});
  }
  out.push_back(ev.final_gain);
  out.push_back(ev.final_bias);
}

namespace {

Var layer_norm_affine(Var x, Var gain, Var bias) {
  return add_rowvec(mul_rowvec(layer_norm_rows(x), gain), bias);
}

Var attention(const EncoderLayerVars& lv, Var x, int heads) {
  Var q = add_rowvec(matmul(x, lv.wq), lv.bq);
  Var k = add_rowvec(matmul(x, lv.wk), lv.bk);
  Var v = add_rowvec(matmul(x, lv.wv), lv.bv);
  int d = q.value().cols();
  int dh = d / heads;
  double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dh));
  Var merged;
  for (int h = 0; h < heads; ++h) {
    Var qh = slice_cols(q, h * dh, dh);
    Var kh = slice_cols(k, h * dh, dh);
    Var vh = slice_cols(v, h * dh, dh);
    Var weights = softmax_rows(scale(matmul(qh, transpose(kh)), inv_sqrt));
    Var oh = matmul(weights, vh);
    merged = h == 0 ? oh : concat_cols(merged, oh);
  }
  return add_rowvec(matmul(merged, lv.wo), lv.bo);
}

}  // namespace

Var encoder_forward(const EncoderVars& ev, Var tokens, const EncoderConfig& cfg) {
  Var x = tokens;
  for (const EncoderLayerVars& lv : ev.layers) {
    Var attn_in = layer_norm_affine(x, lv.ln1_gain, lv.ln1_bias);
    x = add(x, attention(lv, attn_in, cfg.heads));
    Var ffn_in = layer_norm_affine(x, lv.ln2_gain, lv.ln2_bias);
    Var hidden = tanh(add_rowvec(matmul(ffn_in, lv.w1), lv.b1));
    x = add(x, add_rowvec(matmul(hidden, lv.w2), lv.b2));
  }
  return layer_norm_affine(x, ev.final_gain, ev.final_bias);
}

}  // namespace permurank
