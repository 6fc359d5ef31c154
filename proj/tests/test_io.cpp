#include <catch2/catch.hpp>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "helpers.hpp"
#include "lstmscope/config.hpp"
#include "lstmscope/model_io.hpp"
#include "lstmscope/report.hpp"
#include "lstmscope/svg.hpp"

using namespace lstmscope;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  const fs::path dir = fs::temp_directory_path() / "lstmscope_io_tests";
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<CellCharacterization> fake_chars(std::size_t count) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<CellCharacterization> chars(count);
  for (std::size_t i = 0; i < count; ++i) {
    chars[i].cell_index = i;
    chars[i].step.initial_response = dist(rng);
    chars[i].step.final_response = dist(rng);
    chars[i].step.delta_response =
        chars[i].step.final_response - chars[i].step.initial_response;
    chars[i].step.settling_time = rng() % 40;
    chars[i].sine.amplitude = dist(rng);
    chars[i].sine.frequency = 0.1;
    chars[i].sine.correlation = dist(rng);
    chars[i].sine.cyclic = true;
  }
  return chars;
}

}  // namespace

TEST_CASE("model files round-trip bit-exactly") {
  std::mt19937_64 rng(501);
  const Model model = testutil::random_model(rng, {8, 5}, 3, 4, TaskKind::Classification);
  const fs::path path = temp_dir() / "roundtrip.json";
  Provenance prov;
  prov.seed = 1234;
  prov.dataset_id = "unit-test";
  prov.train_config_hash = "deadbeef";
  save_model(model, path.string(), prov);

  Provenance loaded_prov;
  const Model loaded = load_model(path.string(), &loaded_prov);
  REQUIRE(loaded.layers.size() == 2);
  for (std::size_t l = 0; l < 2; ++l) {
    REQUIRE(loaded.layers[l].W == model.layers[l].W);
    REQUIRE(loaded.layers[l].b == model.layers[l].b);
    REQUIRE(loaded.layers[l].n == model.layers[l].n);
    REQUIRE(loaded.layers[l].m == model.layers[l].m);
  }
  REQUIRE(loaded.head_weights == model.head_weights);
  REQUIRE(loaded.head_bias == model.head_bias);
  REQUIRE(loaded.task_kind == model.task_kind);
  REQUIRE(loaded_prov.seed == 1234);
  REQUIRE(loaded_prov.dataset_id == "unit-test");
  REQUIRE(loaded_prov.train_config_hash == "deadbeef");
}

TEST_CASE("model loader rejects broken files") {
  std::mt19937_64 rng(503);
  const Model model = testutil::random_model(rng, {3}, 2, 1);
  const fs::path good = temp_dir() / "good.json";
  save_model(model, good.string());

  SECTION("truncated file") {
    const std::string text = slurp(good);
    const fs::path bad = temp_dir() / "truncated.json";
    std::ofstream(bad, std::ios::binary) << text.substr(0, text.size() / 2);
    REQUIRE_THROWS_AS(load_model(bad.string()), InputError);
  }
  SECTION("foreign gate order tag is named in the error") {
    std::string text = slurp(good);
    const auto pos = text.find("\"zifo\"");
    REQUIRE(pos != std::string::npos);
    text.replace(pos, 6, "\"ifoz\"");
    const fs::path bad = temp_dir() / "gate_tag.json";
    std::ofstream(bad, std::ios::binary) << text;
    REQUIRE_THROWS_WITH(load_model(bad.string()), Catch::Contains("ifoz"));
  }
  SECTION("unknown format version") {
    std::string text = slurp(good);
    const auto pos = text.find("\"format_version\": 1");
    REQUIRE(pos != std::string::npos);
    text.replace(pos, 19, "\"format_version\": 9");
    const fs::path bad = temp_dir() / "version.json";
    std::ofstream(bad, std::ios::binary) << text;
    REQUIRE_THROWS_WITH(load_model(bad.string()), Catch::Contains("9"));
  }
  SECTION("weight array length mismatch names the shape") {
    std::string text = slurp(good);
    const auto pos = text.find("\"n\": 3");
    REQUIRE(pos != std::string::npos);
    text.replace(pos, 6, "\"n\": 4");
    const fs::path bad = temp_dir() / "shape.json";
    std::ofstream(bad, std::ios::binary) << text;
    REQUIRE_THROWS_WITH(load_model(bad.string()), Catch::Contains("length mismatch"));
  }
  SECTION("missing file") {
    REQUIRE_THROWS_AS(load_model((temp_dir() / "absent.json").string()), InputError);
  }
}

TEST_CASE("characterization csv") {
  SECTION("128 cells produce 129 lines with the documented header") {
    const auto chars = fake_chars(128);
    const fs::path path = temp_dir() / "chars128.csv";
    write_characterization_csv(chars, path.string());
    const std::string text = slurp(path);
    std::size_t lines = 0;
    for (char c : text) lines += c == '\n' ? 1 : 0;
    REQUIRE(lines == 129);
    REQUIRE(text.rfind("cell,settle_time,delta,amplitude,correlation,frequency\n", 0) == 0);
  }
  SECTION("writes are byte-identical across runs") {
    const auto chars = fake_chars(16);
    const fs::path a = temp_dir() / "bytes_a.csv";
    const fs::path b = temp_dir() / "bytes_b.csv";
    write_characterization_csv(chars, a.string());
    write_characterization_csv(chars, b.string());
    REQUIRE(slurp(a) == slurp(b));
  }
  SECTION("empty results are rejected before any file is created") {
    const fs::path path = temp_dir() / "never_written.csv";
    fs::remove(path);
    REQUIRE_THROWS_AS(write_characterization_csv({}, path.string()), InputError);
    REQUIRE_FALSE(fs::exists(path));
  }
  SECTION("read-back recovers the five metric columns") {
    const auto chars = fake_chars(9);
    const fs::path path = temp_dir() / "chars9.csv";
    write_characterization_csv(chars, path.string());
    const auto back = read_characterization_csv(path.string());
    REQUIRE(back.size() == 9);
    for (std::size_t i = 0; i < 9; ++i) {
      REQUIRE(back[i].step.settling_time == chars[i].step.settling_time);
      REQUIRE(back[i].step.delta_response == chars[i].step.delta_response);
      REQUIRE(back[i].sine.amplitude == chars[i].sine.amplitude);
      REQUIRE(back[i].sine.correlation == chars[i].sine.correlation);
      REQUIRE(back[i].sine.frequency == chars[i].sine.frequency);
    }
  }
}

TEST_CASE("characterization json carries summaries") {
  const auto chars = fake_chars(12);
  const fs::path path = temp_dir() / "chars.json";
  write_characterization_json(chars, path.string());
  const auto doc = nlohmann::json::parse(slurp(path));
  REQUIRE(doc["cells"].size() == 12);
  REQUIRE(doc["summary"].contains("amplitude"));
  REQUIRE(doc["summary"]["amplitude"].contains("rendered"));
  const std::string rendered = doc["summary"]["amplitude"]["rendered"].get<std::string>();
  REQUIRE(rendered.find("±") != std::string::npos);
}

TEST_CASE("summary text renders the M ± S table") {
  auto chars = fake_chars(3);
  const std::string text = summary_text(chars);
  REQUIRE(text.find("settling_time") != std::string::npos);
  REQUIRE(text.find("±") != std::string::npos);
  REQUIRE(text.find("cycles/step") != std::string::npos);
}

TEST_CASE("ablation csv round trip") {
  std::vector<AblationRecord> records(5);
  for (std::size_t i = 0; i < 5; ++i) {
    records[i].cell_index = i;
    records[i].baseline_score = 0.125;
    records[i].ablated_score = 0.125 + 0.01 * static_cast<double>(i);
    records[i].impact = records[i].ablated_score - records[i].baseline_score;
  }
  const fs::path path = temp_dir() / "ablation.csv";
  write_ablation_csv(records, path.string());
  const std::string text = slurp(path);
  REQUIRE(text.rfind("cell,baseline,ablated,impact\n", 0) == 0);
  const auto back = read_ablation_csv(path.string());
  REQUIRE(back.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) {
    REQUIRE(back[i].cell_index == i);
    REQUIRE(back[i].baseline_score == records[i].baseline_score);
    REQUIRE(back[i].ablated_score == records[i].ablated_score);
    REQUIRE(back[i].impact == records[i].impact);
  }
  REQUIRE_THROWS_AS(write_ablation_csv({}, path.string()), InputError);
}

TEST_CASE("format_double round-trips exactly") {
  std::mt19937_64 rng(505);
  std::uniform_real_distribution<double> dist(-1e3, 1e3);
  for (int i = 0; i < 200; ++i) {
    const double v = dist(rng) * std::pow(10.0, static_cast<int>(rng() % 9) - 4);
    REQUIRE(std::stod(format_double(v)) == v);
  }
}

TEST_CASE("moving average") {
  REQUIRE(moving_average({1, 2, 3, 4}, 1) == Vec{1, 2, 3, 4});
  const Vec smooth = moving_average({0, 3, 6, 9, 12}, 3);
  REQUIRE(smooth[0] == Approx(1.5));   // truncated left edge
  REQUIRE(smooth[2] == Approx(6.0));
  REQUIRE(smooth[4] == Approx(10.5));  // truncated right edge
  REQUIRE_THROWS_AS(moving_average({1.0}, 0), InputError);
}

TEST_CASE("svg plots are emitted as self-contained files") {
  const fs::path dir = temp_dir();
  SECTION("ranked bars") {
    const fs::path path = dir / "bars.svg";
    svg::write_ranked_bar_svg({-0.5, -0.1, 0.2, 0.4, 0.9}, "ranked", "value", path.string());
    const std::string text = slurp(path);
    REQUIRE(text.rfind("<?xml", 0) == 0);
    REQUIRE(text.find("<rect") != std::string::npos);
    REQUIRE(text.find("</svg>") != std::string::npos);
  }
  SECTION("heatmap") {
    const fs::path path = dir / "heat.svg";
    svg::write_heatmap_svg({{0.1, -0.2, 0.3}, {0.9, 0.0, -0.9}}, "cells", path.string());
    const std::string text = slurp(path);
    REQUIRE(text.find("rgb(") != std::string::npos);
    REQUIRE(text.find("</svg>") != std::string::npos);
  }
  SECTION("ablation overlay") {
    const fs::path path = dir / "abl.svg";
    svg::write_ablation_svg({0.0, 0.01, 0.03, 0.02, 0.1}, {0.1, 0.2, 0.3, 0.4, 0.5}, 3,
                            "ablation", path.string());
    const std::string text = slurp(path);
    REQUIRE(text.find("<polyline") != std::string::npos);
    REQUIRE(text.find("<circle") != std::string::npos);
  }
  SECTION("capacity curve") {
    const fs::path path = dir / "cap.svg";
    svg::write_capacity_svg({8, 16, 32}, {0.4, 0.25, 0.12}, {0.05, 0.04, 0.02},
                            "capacity", "|amplitude|", path.string());
    REQUIRE(slurp(path).find("</svg>") != std::string::npos);
  }
  SECTION("unwritable path is rejected") {
    REQUIRE_THROWS_AS(
        svg::write_ranked_bar_svg({1.0}, "x", "y", "/nonexistent_dir/x.svg"),
        InputError);
  }
}

TEST_CASE("config files") {
  SECTION("json config overlays defaults") {
    const fs::path path = temp_dir() / "config.json";
    std::ofstream(path, std::ios::binary) << R"({
      "probe": {"T": 64, "sine_frequency": 0.125},
      "train": {"epochs": 7, "optimizer": "sgd", "loss": "mse", "hidden": [16, 8]},
      "dataset": {"kind": "freq-class", "num_samples": 50},
      "capacity": {"sizes": [4, 8]},
      "report": {"moving_average_window": 5}
    })";
    AppConfig cfg;
    load_config_file(path.string(), cfg);
    REQUIRE(cfg.probe.T == 64);
    REQUIRE(cfg.probe.sine_frequency == 0.125);
    REQUIRE(cfg.train.epochs == 7);
    REQUIRE(cfg.train.optimizer == OptimizerKind::Sgd);
    REQUIRE(cfg.loss_explicit);
    REQUIRE(cfg.hidden == std::vector<std::size_t>{16, 8});
    REQUIRE(cfg.dataset.kind == "freq-class");
    REQUIRE(cfg.dataset.num_samples == 50);
    REQUIRE(cfg.capacity_sizes == std::vector<std::size_t>{4, 8});
    REQUIRE(cfg.report.moving_average_window == 5);
  }
  SECTION("toml subset parses sections, scalars and arrays") {
    const fs::path path = temp_dir() / "config.toml";
    std::ofstream(path, std::ios::binary) << R"(# probe setup
[probe]
T = 48
sine_amplitude = 0.5

[train]
epochs = 3
optimizer = "adam"
hidden = [4, 2]

[dataset]
kind = "sine-mixture"
window = 12
)";
    AppConfig cfg;
    load_config_file(path.string(), cfg);
    REQUIRE(cfg.probe.T == 48);
    REQUIRE(cfg.probe.sine_amplitude == 0.5);
    REQUIRE(cfg.train.epochs == 3);
    REQUIRE(cfg.hidden == std::vector<std::size_t>{4, 2});
    REQUIRE(cfg.dataset.window == 12);
  }
  SECTION("unknown sections and malformed lines are rejected") {
    const fs::path bad1 = temp_dir() / "bad1.json";
    std::ofstream(bad1, std::ios::binary) << R"({"probes": {"T": 10}})";
    AppConfig cfg;
    REQUIRE_THROWS_WITH(load_config_file(bad1.string(), cfg),
                        Catch::Contains("unknown config section"));
    const fs::path bad2 = temp_dir() / "bad2.toml";
    std::ofstream(bad2, std::ios::binary) << "[probe]\nT 48\n";
    REQUIRE_THROWS_AS(load_config_file(bad2.string(), cfg), InputError);
  }
}

TEST_CASE("train config hash is stable and canonical") {
  TrainConfig a;
  TrainConfig b;
  const std::string ha = lstmscope::detail::fnv1a_hex(train_config_canonical(a, {32}));
  const std::string hb = lstmscope::detail::fnv1a_hex(train_config_canonical(b, {32}));
  REQUIRE(ha == hb);
  b.learning_rate = 0.01;
  REQUIRE(ha != lstmscope::detail::fnv1a_hex(train_config_canonical(b, {32})));
}
