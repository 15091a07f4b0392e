#include "permurank/checkpoint.hpp"

#include <fstream>

#include <json.hpp>

#include "permurank/errors.hpp"

namespace permurank {

namespace {

using nlohmann::json;

constexpr const char* kFormat = "permurank-checkpoint";
constexpr int kVersion = 1;

json config_to_json(const EncoderConfig& cfg, const ModelDims& dims) {
  return json{{"depth", cfg.depth},
              {"width", cfg.width},
              {"heads", cfg.heads},
              {"ffn_multiplier", cfg.ffn_multiplier},
              {"use_cls", cfg.use_cls},
              {"query_dim", dims.query_dim},
              {"item_dim", dims.item_dim},
              {"max_len", dims.max_len}};
}

void config_from_json(const json& j, EncoderConfig& cfg, ModelDims& dims) {
  cfg.depth = j.at("depth").get<int>();
  cfg.width = j.at("width").get<int>();
  cfg.heads = j.at("heads").get<int>();
  cfg.ffn_multiplier = j.at("ffn_multiplier").get<int>();
  cfg.use_cls = j.at("use_cls").get<bool>();
  dims.query_dim = j.at("query_dim").get<int>();
  dims.item_dim = j.at("item_dim").get<int>();
  dims.max_len = j.at("max_len").get<int>();
}

template <typename Params>
json params_to_json(Params& p, const std::string& kind) {
  json tensors = json::object();
  visit_params(p, [&](const std::string& name, Tensor& t) {
    tensors[name] = json{{"shape", t.shape()}, {"values", t.values()}};
  });
  return json{{"format", kFormat},
              {"version", kVersion},
              {"kind", kind},
              {"config", config_to_json(p.cfg, p.dims)},
              {"params", tensors}};
}

template <typename Params>
void params_from_json(const json& j, Params& p, const std::string& kind) {
  if (j.value("format", "") != kFormat) {
    throw SchemaError("checkpoint: unrecognized format field");
  }
  if (j.at("version").get<int>() != kVersion) {
    throw SchemaError("checkpoint: version " + j.at("version").dump() + " != supported " +
                      std::to_string(kVersion));
  }
  if (j.at("kind").get<std::string>() != kind) {
    throw SchemaError("checkpoint: kind '" + j.at("kind").get<std::string>() +
                      "', expected '" + kind + "'");
  }
  config_from_json(j.at("config"), p.cfg, p.dims);
  const json& tensors = j.at("params");
  visit_params(p, [&](const std::string& name, Tensor& t) {
    if (!tensors.contains(name)) throw SchemaError("checkpoint: missing tensor " + name);
    const json& tj = tensors.at(name);
    t = Tensor(tj.at("shape").get<std::vector<int>>(),
               tj.at("values").get<std::vector<double>>());
  });
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("checkpoint: cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("checkpoint: ") + e.what());
  }
  return j;
}

void write_json_file(const json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw SchemaError("checkpoint: cannot write " + path);
  out << j.dump() << "\n";
}

/// Builds a parameter struct whose tensors have the right shapes so that
/// visit_params can fill them from JSON.
RewardParams reward_skeleton(const EncoderConfig& cfg, const ModelDims& dims) {
  Rng rng(0);
  return init_reward(cfg, dims, rng);
}

RankerParams ranker_skeleton(const EncoderConfig& cfg, const ModelDims& dims) {
  Rng rng(0);
  return init_ranker(cfg, dims, rng);
}

}  // namespace

void save_reward(const RewardParams& p, const std::string& path) {
  write_json_file(params_to_json(const_cast<RewardParams&>(p), "reward"), path);
}

void save_ranker(const RankerParams& p, const std::string& path) {
  write_json_file(params_to_json(const_cast<RankerParams&>(p), "ranker"), path);
}

RewardParams load_reward(const std::string& path) {
  json j = read_json_file(path);
  EncoderConfig cfg;
  ModelDims dims;
  config_from_json(j.at("config"), cfg, dims);
  RewardParams p = reward_skeleton(cfg, dims);
  params_from_json(j, p, "reward");
  return p;
}

RankerParams load_ranker(const std::string& path) {
  json j = read_json_file(path);
  EncoderConfig cfg;
  ModelDims dims;
  config_from_json(j.at("config"), cfg, dims);
  RankerParams p = ranker_skeleton(cfg, dims);
  params_from_json(j, p, "ranker");
  return p;
}

}  // namespace permurank
