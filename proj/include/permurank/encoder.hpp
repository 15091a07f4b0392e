#pragma once

#include <string>
#include <vector>

#include "permurank/autodiff.hpp"
#include "permurank/rng.hpp"
#include "permurank/tensor.hpp"

namespace permurank {

/// Transformer-style set encoder. No internal positional encoding: token
/// order is invisible to attention, so any order information must enter
/// through the token values themselves.
struct EncoderConfig {
  int depth = 2;
  int width = 32;   // embedding dim d
  int heads = 4;    // must divide width
  int ffn_multiplier = 2;
  bool use_cls = false;

  void validate() const;
};

/// One pre-norm block: LN -> multi-head self-attention -> residual,
/// LN -> tanh feed-forward -> residual.
struct EncoderLayerParams {
  Tensor ln1_gain, ln1_bias;
  Tensor wq, bq, wk, bk, wv, bv, wo, bo;
  Tensor ln2_gain, ln2_bias;
  Tensor w1, b1, w2, b2;
};

struct EncoderParams {
  std::vector<EncoderLayerParams> layers;
  Tensor final_gain, final_bias;  // closing layer norm
};

struct EncoderLayerVars {
  Var ln1_gain, ln1_bias;
  Var wq, bq, wk, bk, wv, bv, wo, bo;
  Var ln2_gain, ln2_bias;
  Var w1, b1, w2, b2;
};

struct EncoderVars {
  std::vector<EncoderLayerVars> layers;
  Var final_gain, final_bias;
};

EncoderParams init_encoder(const EncoderConfig& cfg, Rng& rng);

/// Visits every parameter tensor in a fixed order (the checkpoint,
/// optimizer, and gradient-binding order).
template <typename F>
void visit_encoder_params(EncoderParams& p, const std::string& prefix, F&& f) {
  for (std::size_t i = 0; i < p.layers.size(); ++i) {
    EncoderLayerParams& l = p.layers[i];
    std::string pre = prefix + ".layer" + std::to_string(i) + ".";
    f(pre + "ln1_gain", l.ln1_gain);
    f(pre + "ln1_bias", l.ln1_bias);
    f(pre + "wq", l.wq);
    f(pre + "bq", l.bq);
    f(pre + "wk", l.wk);
    f(pre + "bk", l.bk);
    f(pre + "wv", l.wv);
    f(pre + "bv", l.bv);
    f(pre + "wo", l.wo);
    f(pre + "bo", l.bo);
    f(pre + "ln2_gain", l.ln2_gain);
    f(pre + "ln2_bias", l.ln2_bias);
    f(pre + "w1", l.w1);
    f(pre + "b1", l.b1);
    f(pre + "w2", l.w2);
    f(pre + "b2", l.b2);
  }
  f(prefix + ".final_gain", p.final_gain);
  f(prefix + ".final_bias", p.final_bias);
}

/// Binds parameters onto a tape. as_constant freezes them (no gradients are
/// tracked or applied).
EncoderVars bind_encoder(Tape& tape, const EncoderParams& p, bool as_constant);

/// Bound vars in the same order as visit_encoder_params.
void collect_encoder_vars(const EncoderVars& ev, std::vector<Var>& out);

/// Encoder forward over a T x d token matrix.
Var encoder_forward(const EncoderVars& ev, Var tokens, const EncoderConfig& cfg);

/// Xavier-uniform matrix init; bound a = sqrt(6 / (fan_in + fan_out)).
Tensor xavier_uniform(int fan_in, int fan_out, Rng& rng);

}  // namespace permurank
