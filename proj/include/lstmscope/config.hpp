#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "lstmscope/errors.hpp"
#include "lstmscope/metrics.hpp"
#include "lstmscope/train.hpp"

namespace lstmscope {

// Dataset selection shared by the CLI subcommands. kind is one of
// sine-mixture | freq-class | csv | idx.
struct DatasetSpec {
  std::string kind = "sine-mixture";
  std::string path;         // csv series or idx image file
  std::string labels_path;  // idx labels
  std::size_t window = 24;
  std::size_t length = 480;       // sine-mixture series length
  std::size_t num_samples = 200;  // freq-class
  std::size_t seq_length = 30;    // freq-class
  std::size_t downsample = 1;     // idx
  double train_fraction = 0.8;
};

struct ReportOptions {
  std::size_t moving_average_window = 9;
};

struct AppConfig {
  ProbeConfig probe;
  TrainConfig train;
  std::vector<std::size_t> hidden{32};
  DatasetSpec dataset;
  std::vector<std::size_t> capacity_sizes{8, 16, 32, 64};
  ReportOptions report;
  bool loss_explicit = false;  // set when a config file or flag named the loss
};

namespace detail {

// Minimal TOML subset: [section] headers, key = value with numbers,
// booleans, quoted strings and flat numeric arrays, # comments. Enough for
// the config surface; anything richer should just use JSON.
inline nlohmann::json toml_subset_to_json(const std::string& text,
                                          const std::string& origin) {
  nlohmann::json doc = nlohmann::json::object();
  nlohmann::json* section = &doc;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  auto trim = [](std::string s) {
    const auto a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return std::string();
    const auto b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
  };
  auto parse_scalar = [&](std::string v) -> nlohmann::json {
    v = trim(v);
    require(!v.empty(), origin + ": empty value at line " + std::to_string(line_no));
    if (v.front() == '"') {
      require(v.size() >= 2 && v.back() == '"',
              origin + ": unterminated string at line " + std::to_string(line_no));
      return v.substr(1, v.size() - 2);
    }
    if (v == "true") return true;
    if (v == "false") return false;
    try {
      std::size_t consumed = 0;
      if (v.find_first_of(".eE") == std::string::npos) {
        const long long i = std::stoll(v, &consumed);
        require(consumed == v.size(), origin + ": bad value at line " + std::to_string(line_no));
        return i;
      }
      const double d = std::stod(v, &consumed);
      require(consumed == v.size(), origin + ": bad value at line " + std::to_string(line_no));
      return d;
    } catch (const InputError&) {
      throw;
    } catch (const std::exception&) {
      throw InputError(origin + ": bad value \"" + v + "\" at line " +
                       std::to_string(line_no));
    }
  };
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      require(line.back() == ']', origin + ": bad section header at line " +
                                      std::to_string(line_no));
      const std::string name = trim(line.substr(1, line.size() - 2));
      require(!name.empty(), origin + ": empty section name at line " +
                                 std::to_string(line_no));
      doc[name] = nlohmann::json::object();
      section = &doc[name];
      continue;
    }
    const auto eq = line.find('=');
    require(eq != std::string::npos, origin + ": expected key = value at line " +
                                         std::to_string(line_no));
    const std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    require(!key.empty(), origin + ": empty key at line " + std::to_string(line_no));
    if (!value.empty() && value.front() == '[') {
      require(value.back() == ']', origin + ": unterminated array at line " +
                                       std::to_string(line_no));
      nlohmann::json arr = nlohmann::json::array();
      std::string body = value.substr(1, value.size() - 2);
      std::istringstream parts(body);
      std::string item;
      while (std::getline(parts, item, ',')) {
        item = trim(item);
        if (!item.empty()) arr.push_back(parse_scalar(item));
      }
      (*section)[key] = std::move(arr);
    } else {
      (*section)[key] = parse_scalar(value);
    }
  }
  return doc;
}

template <typename T>
inline void maybe_get(const nlohmann::json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj[key].get<T>();
}

inline void apply_config_json(const nlohmann::json& doc, AppConfig& cfg,
                              const std::string& origin) {
  if (doc.contains("probe")) {
    const auto& j = doc["probe"];
    maybe_get(j, "T", cfg.probe.T);
    maybe_get(j, "step_amplitude", cfg.probe.step_amplitude);
    maybe_get(j, "sine_frequency", cfg.probe.sine_frequency);
    maybe_get(j, "sine_amplitude", cfg.probe.sine_amplitude);
    maybe_get(j, "probe_channel", cfg.probe.probe_channel);
    maybe_get(j, "band", cfg.probe.band);
  }
  if (doc.contains("train")) {
    const auto& j = doc["train"];
    maybe_get(j, "seed", cfg.train.seed);
    maybe_get(j, "epochs", cfg.train.epochs);
    maybe_get(j, "batch_size", cfg.train.batch_size);
    maybe_get(j, "learning_rate", cfg.train.learning_rate);
    maybe_get(j, "beta1", cfg.train.beta1);
    maybe_get(j, "beta2", cfg.train.beta2);
    maybe_get(j, "epsilon", cfg.train.epsilon);
    maybe_get(j, "grad_clip_norm", cfg.train.grad_clip_norm);
    maybe_get(j, "init_scale", cfg.train.init_scale);
    maybe_get(j, "forget_bias", cfg.train.forget_bias);
    maybe_get(j, "checkpoint_every", cfg.train.checkpoint_every);
    if (j.contains("optimizer"))
      cfg.train.optimizer = optimizer_kind_from_string(j["optimizer"].get<std::string>());
    if (j.contains("loss")) {
      cfg.train.loss = loss_kind_from_string(j["loss"].get<std::string>());
      cfg.loss_explicit = true;
    }
    maybe_get(j, "hidden", cfg.hidden);
  }
  if (doc.contains("dataset")) {
    const auto& j = doc["dataset"];
    maybe_get(j, "kind", cfg.dataset.kind);
    maybe_get(j, "path", cfg.dataset.path);
    maybe_get(j, "labels_path", cfg.dataset.labels_path);
    maybe_get(j, "window", cfg.dataset.window);
    maybe_get(j, "length", cfg.dataset.length);
    maybe_get(j, "num_samples", cfg.dataset.num_samples);
    maybe_get(j, "seq_length", cfg.dataset.seq_length);
    maybe_get(j, "downsample", cfg.dataset.downsample);
    maybe_get(j, "train_fraction", cfg.dataset.train_fraction);
  }
  if (doc.contains("capacity")) {
    maybe_get(doc["capacity"], "sizes", cfg.capacity_sizes);
  }
  if (doc.contains("report")) {
    maybe_get(doc["report"], "moving_average_window", cfg.report.moving_average_window);
  }
  for (const auto& [key, value] : doc.items()) {
    (void)value;
    require(key == "probe" || key == "train" || key == "dataset" ||
                key == "capacity" || key == "report",
            origin + ": unknown config section \"" + key + "\"");
  }
}

}  // namespace detail

// Loads a JSON or TOML config file (decided by extension, .json vs .toml)
// and overlays it onto the defaults.
inline void load_config_file(const std::string& path, AppConfig& cfg) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), "cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  const bool is_toml =
      path.size() >= 5 && path.compare(path.size() - 5, 5, ".toml") == 0;
  nlohmann::json doc;
  if (is_toml) {
    doc = detail::toml_subset_to_json(text, path);
  } else {
    try {
      doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw InputError("config file " + path + " is not valid JSON: " + e.what());
    }
  }
  detail::apply_config_json(doc, cfg, path);
}

// Canonical one-line description of the training setup; hashed into model
// provenance.
inline std::string train_config_canonical(const TrainConfig& t,
                                          const std::vector<std::size_t>& hidden) {
  std::ostringstream out;
  out << "seed=" << t.seed << ";epochs=" << t.epochs << ";batch=" << t.batch_size
      << ";lr=" << t.learning_rate << ";opt=" << to_string(t.optimizer)
      << ";b1=" << t.beta1 << ";b2=" << t.beta2 << ";eps=" << t.epsilon
      << ";clip=" << t.grad_clip_norm << ";loss=" << to_string(t.loss)
      << ";init=" << t.init_scale << ";fb=" << t.forget_bias << ";hidden=";
  for (std::size_t i = 0; i < hidden.size(); ++i)
    out << (i ? "," : "") << hidden[i];
  return out.str();
}

}  // namespace lstmscope
