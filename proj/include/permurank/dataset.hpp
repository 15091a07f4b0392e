#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "permurank/tensor.hpp"

namespace permurank {

enum class LabelMode { kBinaryClick, kSoftIps, kBehavioral };

std::string to_string(LabelMode m);
LabelMode label_mode_from_string(const std::string& s);

/// One query, its L candidate items, the logged presentation order and the
/// observed feedback.
struct QueryGroup {
  std::int64_t group_id = 0;
  std::vector<double> query;
  Tensor items;                 // L x item_dim (full feature vectors)
  std::vector<int> brand;       // per item
  std::vector<int> color;       // per item
  std::vector<double> rel_logits;  // latent oracle relevance R per item
  std::vector<int> logged_perm;    // rank k -> item index
  double label = 0.0;
  std::vector<int> clicks;      // per-item clicks under the logged order (may be empty)
  double logged_ppur = std::numeric_limits<double>::quiet_NaN();

  int size() const { return static_cast<int>(rel_logits.size()); }
};

struct Dataset {
  LabelMode label_mode = LabelMode::kSoftIps;
  int query_dim = 0;
  int item_dim = 0;
  std::vector<QueryGroup> train, val, test;
};

/// Writes train/val/test JSONL files (plus a schema-version header line per
/// file) into a directory. gzip=true appends .gz and compresses.
void save_dataset(const Dataset& d, const std::string& dir, bool gzip = false);

/// Loads a dataset directory; *.jsonl.gz is accepted transparently. Unknown
/// fields are tolerated (counted as warnings); missing required fields,
/// truncated lines, or a version mismatch raise SchemaError.
Dataset load_dataset(const std::string& dir);

struct LoadStats {
  long unknown_field_warnings = 0;
};
const LoadStats& last_load_stats();

}  // namespace permurank
