#include "permurank/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "permurank/soft_permutation.hpp"

namespace permurank {

void SyntheticWorldConfig::validate() const {
  if (query_dim < 1 || base_item_dim < 1) {
    throw std::invalid_argument("world: dims must be >= 1");
  }
  if (list_length < 1 || list_length > 10) {
    throw std::invalid_argument("world: list_length must be in [1,10]");
  }
  if (n_brands < 1 || n_colors < 1) {
    throw std::invalid_argument("world: need at least one brand and color");
  }
  if (perms_per_group < 1) throw std::invalid_argument("world: perms_per_group < 1");
  if (relevance_noise < 0 || group_bias < 0 || logging_noise < 0) {
    throw std::invalid_argument("world: noise scales must be non-negative");
  }
}

namespace {

Tensor draw_bilinear_form(const SyntheticWorldConfig& cfg, Rng& rng) {
  int qd = cfg.query_dim, id = cfg.full_item_dim();
  double stddev = 1.0 / std::sqrt(static_cast<double>(qd) * id);
  Tensor w = Tensor::zeros({qd, id});
  for (std::size_t i = 0; i < w.numel(); ++i) w[i] = rng.normal(0.0, stddev);
  return w;
}

/// Query, items, attributes, and latent relevance; shared by all logged
/// permutations of one base group.
QueryGroup make_content(const SyntheticWorldConfig& cfg, const Tensor& bilinear, Rng& rng) {
  int n = cfg.list_length;
  int qd = cfg.query_dim;
  int full_dim = cfg.full_item_dim();

  QueryGroup g;
  g.query.resize(qd);
  for (double& x : g.query) x = rng.normal();

  g.items = Tensor::zeros({n, full_dim});
  g.brand.resize(n);
  g.color.resize(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < cfg.base_item_dim; ++j) g.items.at(i, j) = rng.normal();
    g.brand[i] = rng.uniform_int(cfg.n_brands);
    g.color[i] = rng.uniform_int(cfg.n_colors);
    g.items.at(i, cfg.base_item_dim + g.brand[i]) = 1.0;
    g.items.at(i, cfg.base_item_dim + cfg.n_brands + g.color[i]) = 1.0;
  }

  double group_offset = cfg.group_bias * rng.normal();
  g.rel_logits.resize(n);
  for (int i = 0; i < n; ++i) {
    double bil = 0.0;
    for (int a = 0; a < qd; ++a)
      for (int b = 0; b < full_dim; ++b) bil += g.query[a] * bilinear.at(a, b) * g.items.at(i, b);
    g.rel_logits[i] = bil + group_offset + cfg.relevance_noise * rng.normal();
  }
  return g;
}

/// Draws the logged permutation and the observed feedback for one record.
void apply_logging(const SyntheticWorldConfig& cfg, const IpsOracle& oracle,
                   const BehavioralUserConfig& behavioral, QueryGroup& g, Rng& rng) {
  int n = cfg.list_length;

  // Imperfect production ranker: sorts relevance observed through noise.
  std::vector<double> noisy(g.rel_logits);
  for (double& x : noisy) x += cfg.logging_noise * rng.normal();
  g.logged_perm = hard_permutation(noisy);

  switch (cfg.label_mode) {
    case LabelMode::kBinaryClick: {
      g.clicks.assign(n, 0);
      int any = 0;
      for (int k = 0; k < n; ++k) {
        double p = oracle.click_prob(k, g.rel_logits[g.logged_perm[k]]);
        int c = sample_label(p, rng);
        g.clicks[g.logged_perm[k]] = c;
        any |= c;
      }
      g.label = any;
      break;
    }
    case LabelMode::kSoftIps:
      g.label = oracle.u_ips(g.rel_logits, g.logged_perm);
      break;
    case LabelMode::kBehavioral: {
      PurchaseBreakdown b = behavioral_purchase_prob(behavioral, g, g.logged_perm);
      g.label = b.probability;
      g.logged_ppur = b.probability;
      break;
    }
  }
}

}  // namespace

Dataset generate(const SyntheticWorldConfig& cfg, const IpsOracle& oracle,
                 const BehavioralUserConfig& behavioral, int n_groups) {
  cfg.validate();
  if (n_groups < 10) throw std::invalid_argument("generate: need at least 10 groups");
  if (cfg.list_length > oracle.max_positions()) {
    throw std::invalid_argument("generate: list_length exceeds the examination table");
  }
  if (cfg.list_length > static_cast<int>(behavioral.position_scores.size()) &&
      cfg.label_mode == LabelMode::kBehavioral) {
    throw std::invalid_argument("generate: list_length exceeds the position-score table");
  }

  Dataset d;
  d.label_mode = cfg.label_mode;
  d.query_dim = cfg.query_dim;
  d.item_dim = cfg.full_item_dim();

  Rng world_rng(cfg.seed);
  Tensor bilinear = draw_bilinear_form(cfg, world_rng);

  // Split by hashing the base group id: rank ids by hash, then cut exact
  // 80/10/10 boundaries. Siblings share the base id, hence the split.
  std::vector<int> order(n_groups);
  std::iota(order.begin(), order.end(), 0);
  std::vector<std::uint64_t> hashes(n_groups);
  for (int i = 0; i < n_groups; ++i) hashes[i] = splitmix64(cfg.seed ^ splitmix64(i + 0x5151));
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return hashes[a] != hashes[b] ? hashes[a] < hashes[b] : a < b; });
  int n_train = n_groups * 8 / 10;
  int n_val = n_groups / 10;
  std::vector<int> split_of(n_groups);
  for (int r = 0; r < n_groups; ++r) {
    split_of[order[r]] = r < n_train ? 0 : (r < n_train + n_val ? 1 : 2);
  }

  for (int base = 0; base < n_groups; ++base) {
    Rng content_rng = Rng::stream(cfg.seed, static_cast<std::uint64_t>(base));
    QueryGroup content = make_content(cfg, bilinear, content_rng);
    for (int p = 0; p < cfg.perms_per_group; ++p) {
      std::int64_t gid = static_cast<std::int64_t>(base) * cfg.perms_per_group + p;
      QueryGroup g = content;
      g.group_id = gid;
      Rng log_rng = Rng::stream(cfg.seed ^ 0x9e3779b9ULL, static_cast<std::uint64_t>(gid));
      apply_logging(cfg, oracle, behavioral, g, log_rng);
      switch (split_of[base]) {
        case 0: d.train.push_back(std::move(g)); break;
        case 1: d.val.push_back(std::move(g)); break;
        default: d.test.push_back(std::move(g)); break;
      }
    }
  }
  return d;
}

}  // namespace permurank
