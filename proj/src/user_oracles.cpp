#include "permurank/user_oracles.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "permurank/soft_permutation.hpp"

namespace permurank {

double sigmoid_scalar(double x) {
  return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

IpsOracle::IpsOracle(std::vector<double> examination) : exam_(std::move(examination)) {
  if (exam_.empty()) throw std::invalid_argument("IpsOracle: empty examination table");
  if (exam_[0] != 1.0) throw std::invalid_argument("IpsOracle: examination[1] must be 1.0");
  for (std::size_t i = 0; i < exam_.size(); ++i) {
    if (!(exam_[i] > 0.0 && exam_[i] <= 1.0)) {
      throw std::invalid_argument("IpsOracle: examination entries must be in (0,1]");
    }
    if (i > 0 && exam_[i] > exam_[i - 1]) {
      throw std::invalid_argument("IpsOracle: examination must be non-increasing");
    }
  }
}

double IpsOracle::click_prob(int position, double rel_logit) const {
  if (position < 0 || position >= static_cast<int>(exam_.size())) {
    throw std::invalid_argument("click_prob: position out of range");
  }
  return exam_[position] * sigmoid_scalar(rel_logit);
}

double IpsOracle::u_ips(const std::vector<double>& rel_logits,
                        const std::vector<int>& order) const {
  if (order.size() > exam_.size()) {
    throw std::invalid_argument("u_ips: group longer than the examination table");
  }
  double no_click = 1.0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    no_click *= 1.0 - click_prob(static_cast<int>(k), rel_logits[order[k]]);
  }
  return 1.0 - no_click;
}

std::vector<int> ideal_permutation(const std::vector<double>& rel_logits) {
  return hard_permutation(rel_logits);
}

void BehavioralUserConfig::validate() const {
  auto in_range = [](double p) { return p >= 0.0 && p < 1.0; };
  if (!in_range(brand_penalty) || !in_range(color_penalty) || !in_range(irrelevance_penalty)) {
    throw std::invalid_argument("BehavioralUserConfig: penalties must be in [0,1)");
  }
  if (top_window < 1) throw std::invalid_argument("BehavioralUserConfig: top_window < 1");
  if (position_scores.empty()) {
    throw std::invalid_argument("BehavioralUserConfig: empty position scores");
  }
  for (std::size_t i = 1; i < position_scores.size(); ++i) {
    if (position_scores[i] > position_scores[i - 1]) {
      throw std::invalid_argument("BehavioralUserConfig: position scores must be non-increasing");
    }
  }
}

PurchaseBreakdown behavioral_purchase_prob_raw(const BehavioralUserConfig& cfg,
                                               const std::vector<double>& rel_probs,
                                               const std::vector<int>& brand,
                                               const std::vector<int>& color,
                                               const std::vector<int>& order) {
  cfg.validate();
  int n = static_cast<int>(order.size());
  if (n > static_cast<int>(cfg.position_scores.size())) {
    throw std::invalid_argument("behavioral_purchase_prob: group longer than position table");
  }
  PurchaseBreakdown b;

  double no_buy = 1.0;
  for (int k = 0; k < n; ++k) {
    no_buy *= 1.0 - cfg.position_scores[k] * rel_probs[order[k]];
  }
  b.base = 1.0 - no_buy;

  // Adjacency penalties are undefined for single-item lists.
  if (n >= 2) {
    int same_brand = 0, same_color = 0;
    for (int k = 0; k + 1 < n; ++k) {
      if (brand[order[k]] == brand[order[k + 1]]) ++same_brand;
      if (color[order[k]] == color[order[k + 1]]) ++same_color;
    }
    double denom = static_cast<double>(n - 1);
    b.brand_factor = 1.0 - cfg.brand_penalty * (same_brand / denom);
    b.color_factor = 1.0 - cfg.color_penalty * (same_color / denom);
  }

  int window = std::min(cfg.top_window, n);
  double top_rel = 0.0;
  for (int k = 0; k < window; ++k) top_rel += rel_probs[order[k]];
  top_rel /= window;
  b.irrelevance_factor = 1.0 - cfg.irrelevance_penalty * std::max(0.0, 1.0 - top_rel);

  double p = b.base * b.brand_factor * b.color_factor * b.irrelevance_factor;
  b.probability = std::clamp(p, 0.0, 1.0);
  return b;
}

namespace {

std::vector<double> rel_probs_of(const QueryGroup& g) {
  std::vector<double> probs(g.rel_logits.size());
  for (std::size_t i = 0; i < probs.size(); ++i) probs[i] = sigmoid_scalar(g.rel_logits[i]);
  return probs;
}

}  // namespace

PurchaseBreakdown behavioral_purchase_prob(const BehavioralUserConfig& cfg,
                                           const QueryGroup& group,
                                           const std::vector<int>& order) {
  return behavioral_purchase_prob_raw(cfg, rel_probs_of(group), group.brand, group.color,
                                      order);
}

int choose_item(const BehavioralUserConfig& cfg, const QueryGroup& group,
                const std::vector<int>& order) {
  if (order.empty()) throw std::invalid_argument("choose_item: empty group");
  std::vector<double> rel = rel_probs_of(group);
  int best_pos = 0;
  double best = -1.0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    double v = cfg.position_scores[k] * rel[order[k]];
    if (v > best) {
      best = v;
      best_pos = static_cast<int>(k);
    }
  }
  return order[best_pos];
}

int sample_label(double p, Rng& rng) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("sample_label: p outside [0,1]");
  return rng.uniform() < p ? 1 : 0;
}

}  // namespace permurank
