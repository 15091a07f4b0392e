#pragma once

#include <array>
#include <vector>

#include "permurank/dataset.hpp"
#include "permurank/rng.hpp"

namespace permurank {

/// Examination probabilities per rank position (positions 1..8).
inline constexpr std::array<double, 8> kDefaultExamination = {
    1.0, 0.6738, 0.4145, 0.2932, 0.2079, 0.1714, 0.1363, 0.1166};

inline std::vector<double> default_examination() {
  return {kDefaultExamination.begin(), kDefaultExamination.end()};
}

double sigmoid_scalar(double x);

/// Position-bias click model: P(click at position l) = P(E_l) * sigmoid(R).
/// Ground truth for KD-style evaluation.
class IpsOracle {
 public:
  explicit IpsOracle(std::vector<double> examination = default_examination());

  const std::vector<double>& examination() const { return exam_; }
  int max_positions() const { return static_cast<int>(exam_.size()); }

  /// position is 0-based.
  double click_prob(int position, double rel_logit) const;

  /// Probability of at least one click when items are shown in the given
  /// order (order[k] = item at rank k).
  double u_ips(const std::vector<double>& rel_logits, const std::vector<int>& order) const;

 private:
  std::vector<double> exam_;
};

/// Relevance-descending order; attains the exhaustive maximum of u_ips for
/// any non-increasing examination vector. Ties broken by item index.
std::vector<int> ideal_permutation(const std::vector<double>& rel_logits);

/// Rule-based list-level user standing in for the external judge: position
/// bias plus multiplicative brand-adjacency, color-adjacency and
/// top-irrelevance penalties.
struct BehavioralUserConfig {
  std::vector<double> position_scores = default_examination();
  double brand_penalty = 0.3;        // beta
  double color_penalty = 0.2;        // gamma
  double irrelevance_penalty = 0.4;  // delta
  int top_window = 3;

  void validate() const;
};

struct PurchaseBreakdown {
  double base = 0.0;         // 1 - prod(1 - pos_l * rel_{pi_l})
  double brand_factor = 1.0;
  double color_factor = 1.0;
  double irrelevance_factor = 1.0;
  double probability = 0.0;  // product of the four, clamped to [0,1]
};

/// Purchase probability of a whole ordered list. Per-item relevance is
/// sigmoid of the latent relevance logit.
PurchaseBreakdown behavioral_purchase_prob(const BehavioralUserConfig& cfg,
                                           const QueryGroup& group,
                                           const std::vector<int>& order);

/// Same, from raw per-item attributes (used by the judge-exchange path).
PurchaseBreakdown behavioral_purchase_prob_raw(const BehavioralUserConfig& cfg,
                                               const std::vector<double>& rel_probs,
                                               const std::vector<int>& brand,
                                               const std::vector<int>& color,
                                               const std::vector<int>& order);

/// Item the simulated user would pick: argmax of position score times
/// relevance; ties go to the lower position. Returns an item index.
int choose_item(const BehavioralUserConfig& cfg, const QueryGroup& group,
                const std::vector<int>& order);

/// Bernoulli(p) draw; p outside [0,1] is a domain error.
int sample_label(double p, Rng& rng);

}  // namespace permurank
