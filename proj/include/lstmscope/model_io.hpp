#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "lstmscope/errors.hpp"
#include "lstmscope/linalg.hpp"
#include "lstmscope/lstm.hpp"

namespace lstmscope {

struct Provenance {
  std::uint64_t seed = 0;
  std::string dataset_id;
  std::string train_config_hash;
};

namespace detail {

// FNV-1a over a canonical config string; enough to tag provenance.
inline std::string fnv1a_hex(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline Vec json_to_vec(const nlohmann::ordered_json& arr, std::size_t expected,
                       const std::string& what) {
  require(arr.is_array(), "model file: " + what + " must be an array");
  require(arr.size() == expected,
          "model file: " + what + " length mismatch: expected " +
              std::to_string(expected) + ", actual " + std::to_string(arr.size()));
  Vec out;
  out.reserve(expected);
  for (const auto& v : arr) {
    require(v.is_number(), "model file: non-numeric entry in " + what);
    out.push_back(v.get<double>());
  }
  require(all_finite(out), "model file: non-finite entry in " + what);
  return out;
}

}  // namespace detail

inline constexpr int kModelFormatVersion = 1;

// Text model format. Weights are stored row-major per layer under the gate
// order tag "zifo"; numeric values survive a save/load round trip
// bit-exactly (shortest round-trip decimal encoding).
inline void save_model(const Model& model, const std::string& path,
                       const Provenance& prov = {}) {
  model.validate();
  nlohmann::ordered_json doc;
  doc["format_version"] = kModelFormatVersion;
  doc["task_kind"] = to_string(model.task_kind);
  doc["gate_order"] = "zifo";
  doc["layers"] = nlohmann::ordered_json::array();
  for (const auto& layer : model.layers) {
    nlohmann::ordered_json jl;
    jl["n"] = layer.n;
    jl["m"] = layer.m;
    jl["W"] = layer.W.data;
    jl["b"] = layer.b;
    doc["layers"].push_back(std::move(jl));
  }
  doc["head"] = {{"p", model.head_bias.size()},
                 {"weights", model.head_weights.data},
                 {"bias", model.head_bias}};
  doc["provenance"] = {{"seed", prov.seed},
                       {"dataset", prov.dataset_id},
                       {"train_config_hash", prov.train_config_hash}};
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), "cannot open model file for writing: " + path);
  out << doc.dump(2) << "\n";
  require(static_cast<bool>(out), "failed writing model file: " + path);
}

inline Model load_model(const std::string& path, Provenance* prov_out = nullptr) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), "cannot open model file: " + path);
  nlohmann::ordered_json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw InputError("model file " + path + " is not valid JSON: " + e.what());
  }

  require(doc.contains("format_version") && doc["format_version"].is_number_integer(),
          "model file: missing format_version");
  const int version = doc["format_version"].get<int>();
  require(version == kModelFormatVersion,
          "model file: unknown format_version " + std::to_string(version) +
              " (expected " + std::to_string(kModelFormatVersion) + ")");
  require(doc.contains("gate_order") && doc["gate_order"].is_string(),
          "model file: missing gate_order tag");
  const std::string gate_order = doc["gate_order"].get<std::string>();
  require(gate_order == "zifo",
          "model file: unsupported gate order tag \"" + gate_order +
              "\" (expected \"zifo\")");
  require(doc.contains("task_kind") && doc["task_kind"].is_string(),
          "model file: missing task_kind");

  Model model;
  model.task_kind = task_kind_from_string(doc["task_kind"].get<std::string>());
  require(doc.contains("layers") && doc["layers"].is_array() && !doc["layers"].empty(),
          "model file: needs a non-empty layers array");
  int layer_index = 1;
  for (const auto& jl : doc["layers"]) {
    LstmParams p;
    require(jl.contains("n") && jl.contains("m") && jl.contains("W") && jl.contains("b"),
            "model file: layer missing n/m/W/b");
    p.n = jl["n"].get<std::size_t>();
    p.m = jl["m"].get<std::size_t>();
    require(p.n > 0 && p.m > 0, "model file: layer dimensions must be positive");
    p.layer_index = layer_index++;
    p.W = Matrix(4 * p.n, p.m + p.n);
    p.W.data = detail::json_to_vec(jl["W"], 4 * p.n * (p.m + p.n),
                                   "layer " + std::to_string(p.layer_index) + " W");
    p.b = detail::json_to_vec(jl["b"], 4 * p.n,
                              "layer " + std::to_string(p.layer_index) + " b");
    model.layers.push_back(std::move(p));
  }

  require(doc.contains("head") && doc["head"].is_object(), "model file: missing head");
  const auto& jh = doc["head"];
  require(jh.contains("p") && jh.contains("weights") && jh.contains("bias"),
          "model file: head missing p/weights/bias");
  const std::size_t p_out = jh["p"].get<std::size_t>();
  require(p_out > 0, "model file: head output dimension must be positive");
  const std::size_t n_last = model.layers.back().n;
  model.head_weights = Matrix(p_out, n_last);
  model.head_weights.data = detail::json_to_vec(jh["weights"], p_out * n_last, "head weights");
  model.head_bias = detail::json_to_vec(jh["bias"], p_out, "head bias");

  if (prov_out && doc.contains("provenance") && doc["provenance"].is_object()) {
    const auto& jp = doc["provenance"];
    if (jp.contains("seed")) prov_out->seed = jp["seed"].get<std::uint64_t>();
    if (jp.contains("dataset")) prov_out->dataset_id = jp["dataset"].get<std::string>();
    if (jp.contains("train_config_hash"))
      prov_out->train_config_hash = jp["train_config_hash"].get<std::string>();
  }

  model.validate();
  return model;
}

}  // namespace lstmscope
