#include "permurank/dataset.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include <json.hpp>
#include <zlib.h>

#include "permurank/errors.hpp"

namespace permurank {

namespace {

using nlohmann::json;

constexpr const char* kFormat = "permurank-dataset";
constexpr int kVersion = 1;

LoadStats g_load_stats;

const std::set<std::string> kKnownFields = {
    "group_id", "q",      "items",  "brand", "color",
    "rel",      "pi",     "y",      "clicks", "ppur_logged"};

json group_to_json(const QueryGroup& g) {
  json j;
  j["group_id"] = g.group_id;
  j["q"] = g.query;
  std::vector<std::vector<double>> rows(g.items.rows());
  for (int i = 0; i < g.items.rows(); ++i) {
    rows[i].assign(g.items.data() + static_cast<std::size_t>(i) * g.items.cols(),
                   g.items.data() + static_cast<std::size_t>(i + 1) * g.items.cols());
  }
  j["items"] = rows;
  j["brand"] = g.brand;
  j["color"] = g.color;
  j["rel"] = g.rel_logits;
  j["pi"] = g.logged_perm;
  j["y"] = g.label;
  if (!g.clicks.empty()) j["clicks"] = g.clicks;
  if (!std::isnan(g.logged_ppur)) j["ppur_logged"] = g.logged_ppur;
  return j;
}

QueryGroup group_from_json(const json& j, long line) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!kKnownFields.count(it.key())) ++g_load_stats.unknown_field_warnings;
  }
  QueryGroup g;
  try {
    g.group_id = j.at("group_id").get<std::int64_t>();
    g.query = j.at("q").get<std::vector<double>>();
    auto rows = j.at("items").get<std::vector<std::vector<double>>>();
    if (rows.empty()) throw SchemaError("dataset: empty item list", line);
    int n = static_cast<int>(rows.size());
    int d = static_cast<int>(rows[0].size());
    std::vector<double> flat;
    flat.reserve(static_cast<std::size_t>(n) * d);
    for (const auto& r : rows) {
      if (static_cast<int>(r.size()) != d) throw SchemaError("dataset: ragged item rows", line);
      flat.insert(flat.end(), r.begin(), r.end());
    }
    g.items = Tensor({n, d}, std::move(flat));
    g.brand = j.at("brand").get<std::vector<int>>();
    g.color = j.at("color").get<std::vector<int>>();
    g.rel_logits = j.at("rel").get<std::vector<double>>();
    g.logged_perm = j.at("pi").get<std::vector<int>>();
    g.label = j.at("y").get<double>();
    if (j.contains("clicks")) g.clicks = j.at("clicks").get<std::vector<int>>();
    if (j.contains("ppur_logged")) g.logged_ppur = j.at("ppur_logged").get<double>();
  } catch (const json::exception& e) {
    throw SchemaError(std::string("dataset: ") + e.what(), line);
  }
  return g;
}

// --- line-oriented IO with transparent gzip ---

class LineWriter {
 public:
  LineWriter(const std::string& path, bool gzip) : gzip_(gzip) {
    if (gzip_) {
      gz_ = gzopen(path.c_str(), "wb");
      if (!gz_) throw SchemaError("dataset: cannot write " + path);
    } else {
      out_.open(path);
      if (!out_) throw SchemaError("dataset: cannot write " + path);
    }
  }
  ~LineWriter() {
    if (gz_) gzclose(gz_);
  }
  void line(const std::string& s) {
    if (gzip_) {
      gzwrite(gz_, s.data(), static_cast<unsigned>(s.size()));
      gzwrite(gz_, "\n", 1);
    } else {
      out_ << s << "\n";
    }
  }

 private:
  bool gzip_;
  std::ofstream out_;
  gzFile gz_ = nullptr;
};

std::vector<std::string> read_lines(const std::string& path) {
  std::vector<std::string> lines;
  if (path.size() > 3 && path.substr(path.size() - 3) == ".gz") {
    gzFile gz = gzopen(path.c_str(), "rb");
    if (!gz) throw SchemaError("dataset: cannot open " + path);
    std::string current;
    char buf[1 << 16];
    int got;
    while ((got = gzread(gz, buf, sizeof(buf))) > 0) {
      current.append(buf, static_cast<std::size_t>(got));
    }
    gzclose(gz);
    std::size_t start = 0;
    while (start < current.size()) {
      std::size_t end = current.find('\n', start);
      if (end == std::string::npos) {
        lines.push_back(current.substr(start));
        break;
      }
      lines.push_back(current.substr(start, end - start));
      start = end + 1;
    }
  } else {
    std::ifstream in(path);
    if (!in) throw SchemaError("dataset: cannot open " + path);
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

std::string split_path(const std::string& dir, const std::string& split, bool gzip) {
  return dir + "/" + split + ".jsonl" + (gzip ? ".gz" : "");
}

void write_split(const std::vector<QueryGroup>& groups, const Dataset& d,
                 const std::string& path, bool gzip) {
  LineWriter w(path, gzip);
  json header{{"format", kFormat},
              {"version", kVersion},
              {"label_mode", to_string(d.label_mode)},
              {"query_dim", d.query_dim},
              {"item_dim", d.item_dim},
              {"groups", groups.size()}};
  w.line(header.dump());
  for (const QueryGroup& g : groups) w.line(group_to_json(g).dump());
}

std::vector<QueryGroup> read_split(const std::string& path, Dataset& d) {
  std::vector<std::string> lines = read_lines(path);
  if (lines.empty()) throw SchemaError("dataset: empty file " + path);
  json header;
  try {
    header = json::parse(lines[0]);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("dataset: bad header: ") + e.what(), 1);
  }
  if (header.value("format", "") != kFormat) {
    throw SchemaError("dataset: unrecognized format in " + path, 1);
  }
  int version = header.at("version").get<int>();
  if (version != kVersion) {
    throw SchemaError("dataset: file version " + std::to_string(version) +
                          " != supported " + std::to_string(kVersion),
                      1);
  }
  d.label_mode = label_mode_from_string(header.at("label_mode").get<std::string>());
  d.query_dim = header.at("query_dim").get<int>();
  d.item_dim = header.at("item_dim").get<int>();
  std::vector<QueryGroup> groups;
  groups.reserve(lines.size() - 1);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    long line_no = static_cast<long>(i) + 1;
    json j;
    try {
      j = json::parse(lines[i]);
    } catch (const json::parse_error& e) {
      throw SchemaError(std::string("dataset: truncated or malformed line: ") + e.what(),
                        line_no);
    }
    groups.push_back(group_from_json(j, line_no));
  }
  return groups;
}

std::string find_split_file(const std::string& dir, const std::string& split) {
  std::string plain = split_path(dir, split, false);
  if (std::filesystem::exists(plain)) return plain;
  std::string gz = split_path(dir, split, true);
  if (std::filesystem::exists(gz)) return gz;
  throw SchemaError("dataset: missing " + plain + " (or .gz)");
}

}  // namespace

std::string to_string(LabelMode m) {
  switch (m) {
    case LabelMode::kBinaryClick: return "binary_click";
    case LabelMode::kSoftIps: return "soft_ips";
    case LabelMode::kBehavioral: return "behavioral";
  }
  return "?";
}

LabelMode label_mode_from_string(const std::string& s) {
  if (s == "binary_click") return LabelMode::kBinaryClick;
  if (s == "soft_ips") return LabelMode::kSoftIps;
  if (s == "behavioral") return LabelMode::kBehavioral;
  throw SchemaError("dataset: unknown label mode '" + s + "'");
}

void save_dataset(const Dataset& d, const std::string& dir, bool gzip) {
  std::filesystem::create_directories(dir);
  write_split(d.train, d, split_path(dir, "train", gzip), gzip);
  write_split(d.val, d, split_path(dir, "val", gzip), gzip);
  write_split(d.test, d, split_path(dir, "test", gzip), gzip);
}

Dataset load_dataset(const std::string& dir) {
  g_load_stats = LoadStats{};
  Dataset d;
  d.train = read_split(find_split_file(dir, "train"), d);
  d.val = read_split(find_split_file(dir, "val"), d);
  d.test = read_split(find_split_file(dir, "test"), d);
  return d;
}

const LoadStats& last_load_stats() { return g_load_stats; }

}  // namespace permurank
