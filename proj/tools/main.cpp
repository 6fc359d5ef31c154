// lstmscope CLI: train desk-scale LSTMs, probe every cell's step and sine
// response, knock cells out, and sweep network capacity.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lstmscope/lstmscope.hpp"

namespace fs = std::filesystem;
using namespace lstmscope;

namespace {

Dataset build_dataset(const DatasetSpec& spec, std::uint64_t seed) {
  if (spec.kind == "sine-mixture") return make_sine_mixture(spec.length, spec.window);
  if (spec.kind == "freq-class")
    return make_freq_classification(spec.num_samples, spec.seq_length, 0.05, 0.125, seed);
  if (spec.kind == "csv") {
    require(!spec.path.empty(), "dataset kind csv needs --data <path>");
    return load_series_csv(spec.path, spec.window);
  }
  if (spec.kind == "idx") {
    require(!spec.path.empty() && !spec.labels_path.empty(),
            "dataset kind idx needs --data <images> and --labels <labels>");
    return load_row_stacked_images(spec.path, spec.labels_path, spec.downsample);
  }
  throw InputError("unknown dataset kind: \"" + spec.kind +
                   "\" (expected sine-mixture | freq-class | csv | idx)");
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  require(!ec, "cannot create output directory: " + dir.string());
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), "cannot open output file for writing: " + path.string());
  out << text;
  require(static_cast<bool>(out), "failed writing " + path.string());
}

void write_loss_history(const Vec& history, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), "cannot open output file for writing: " + path.string());
  out << "epoch,loss\n";
  for (std::size_t i = 0; i < history.size(); ++i)
    out << i + 1 << "," << format_double(history[i]) << "\n";
  require(static_cast<bool>(out), "failed writing " + path.string());
}

void emit_ranked_bar_plots(const std::vector<CellCharacterization>& chars,
                           const fs::path& plot_dir) {
  ensure_dir(plot_dir);
  const std::pair<std::string, std::string> metrics[] = {
      {"settling_time", "settling time [steps]"},
      {"delta_response", "delta response"},
      {"amplitude", "sine amplitude"},
      {"correlation", "input-output correlation"},
      {"frequency", "dominant frequency [cycles/step]"},
  };
  for (const auto& [metric, label] : metrics) {
    const auto order = rank_cells(chars, metric, SortOrder::Ascending);
    Vec sorted;
    sorted.reserve(order.size());
    for (std::size_t idx : order) sorted.push_back(metric_value(chars[idx], metric));
    svg::write_ranked_bar_svg(sorted, "ranked " + metric, label,
                              (plot_dir / ("ranked_" + metric + ".svg")).string());
  }
}

// Cell-output heatmap of the whole network driven by the sine probe,
// rows sorted by each cell's settling time.
void emit_heatmap(const Model& model, const std::vector<CellCharacterization>& chars,
                  const ProbeConfig& probe, const fs::path& path) {
  const Signal sine =
      make_sine(probe.T, probe.effective_sine_frequency(), probe.sine_amplitude);
  std::vector<Vec> xs(sine.length(), Vec(model.input_dim()));
  for (std::size_t t = 0; t < sine.length(); ++t)
    xs[t].assign(model.input_dim(), sine.samples[t]);
  const auto traj = network_forward(model, xs);
  std::vector<Vec> rows;
  rows.reserve(model.total_cells());
  for (std::size_t l = 0; l < traj.size(); ++l)
    for (std::size_t u = 0; u < model.layers[l].n; ++u) {
      Vec row(sine.length());
      for (std::size_t t = 0; t < sine.length(); ++t) row[t] = traj[l][t].y[u];
      rows.push_back(std::move(row));
    }
  const auto order = rank_cells(chars, "settling_time", SortOrder::Ascending);
  std::vector<Vec> sorted_rows;
  sorted_rows.reserve(rows.size());
  for (std::size_t idx : order) sorted_rows.push_back(std::move(rows[idx]));
  svg::write_heatmap_svg(sorted_rows, "cell outputs (sine probe, sorted by settling time)",
                         path.string());
}

void emit_ablation_plots(const std::vector<AblationRecord>& records,
                         const std::vector<CellCharacterization>& chars,
                         std::size_t ma_window, const fs::path& plot_dir) {
  ensure_dir(plot_dir);
  for (const std::string metric : {"amplitude", "delta_response"}) {
    Vec keys(chars.size());
    for (std::size_t i = 0; i < chars.size(); ++i)
      keys[i] = std::abs(metric_value(chars[i], metric));
    std::vector<std::size_t> order(chars.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (keys[a] != keys[b]) return keys[a] < keys[b];
      return a < b;
    });
    Vec impacts_by_rank, metric_by_rank;
    for (std::size_t idx : order) {
      impacts_by_rank.push_back(records[idx].impact);
      metric_by_rank.push_back(keys[idx]);
    }
    svg::write_ablation_svg(impacts_by_rank, metric_by_rank, ma_window,
                            "ablation impact vs |" + metric + "| rank",
                            (plot_dir / ("ablation_" + metric + ".svg")).string());
  }
}

void emit_capacity_plots(const std::vector<CapacityPoint>& points, const fs::path& plot_dir) {
  ensure_dir(plot_dir);
  std::vector<std::size_t> sizes;
  for (const auto& pt : points)
    if (pt.ok) sizes.push_back(pt.N);
  require(!sizes.empty(), "capacity plots: no successful sweep points");
  struct Item {
    const char* name;
    const char* label;
    Summary CapacityPoint::* field;
  };
  const Item items[] = {
      {"settling_time", "settling time [steps]", &CapacityPoint::settle},
      {"delta_response", "delta response", &CapacityPoint::delta},
      {"amplitude", "sine amplitude", &CapacityPoint::amplitude},
      {"abs_amplitude", "|sine amplitude|", &CapacityPoint::abs_amplitude},
      {"correlation", "input-output correlation", &CapacityPoint::correlation},
      {"frequency", "dominant frequency [cycles/step]", &CapacityPoint::frequency},
  };
  for (const auto& item : items) {
    Vec means, stds;
    for (const auto& pt : points) {
      if (!pt.ok) continue;
      means.push_back((pt.*item.field).mean);
      stds.push_back((pt.*item.field).stddev);
    }
    svg::write_capacity_svg(sizes, means, stds, std::string("capacity: ") + item.name,
                            item.label,
                            (plot_dir / (std::string("capacity_") + item.name + ".svg")).string());
  }
  Vec scores, zeros;
  for (const auto& pt : points) {
    if (!pt.ok) continue;
    scores.push_back(pt.score);
    zeros.push_back(0.0);
  }
  svg::write_capacity_svg(sizes, scores, zeros, "capacity: test score", "score",
                          (plot_dir / "capacity_score.svg").string());
}

struct CliFlags {
  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed = 42;

  std::size_t probe_T = 100;
  double step_amp = 1.0;
  double sine_freq = 0.0;
  double sine_amp = 1.0;

  std::string dataset_kind = "sine-mixture";
  std::string data_path;
  std::string labels_path;
  std::size_t window = 24;
  std::size_t downsample = 1;
  double train_fraction = 0.8;
  std::size_t series_length = 480;
  std::size_t num_samples = 200;
  std::size_t seq_length = 30;

  std::vector<std::size_t> hidden{32};
  std::size_t epochs = 150;
  std::size_t batch_size = 16;
  double learning_rate = 1e-3;
  std::string optimizer = "adam";
  std::string loss = "auto";
  double grad_clip = 1.0;
  double init_scale = 0.0;
  double forget_bias = 0.0;
  std::size_t checkpoint_every = 0;

  std::vector<std::size_t> sizes{8, 16, 32, 64};
  std::string model_path;
  std::string chars_path;
  std::string ablation_path;
  std::string capacity_path;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lstmscope: response characterization for desk-scale LSTM networks"};
  app.require_subcommand(1);
  app.fallthrough();

  CliFlags f;
  auto* opt_config = app.add_option("--config", f.config_path,
                                    "JSON or TOML config file (flags override it)");
  auto* opt_seed = app.add_option("--seed", f.seed, "global random seed");
  app.add_option("--out", f.out_dir, "output directory")->capture_default_str();

  auto* opt_probe_T = app.add_option("--probe-T", f.probe_T, "probe length T");
  auto* opt_step_amp = app.add_option("--step-amp", f.step_amp, "step probe amplitude");
  auto* opt_sine_freq =
      app.add_option("--sine-freq", f.sine_freq, "sine probe frequency [cycles/step]");
  auto* opt_sine_amp = app.add_option("--sine-amp", f.sine_amp, "sine probe amplitude");

  auto add_dataset_flags = [&](CLI::App* cmd) {
    cmd->add_option("--dataset", f.dataset_kind,
                    "dataset kind: sine-mixture | freq-class | csv | idx");
    cmd->add_option("--data", f.data_path, "csv series file or idx image file");
    cmd->add_option("--labels", f.labels_path, "idx label file");
    cmd->add_option("--window", f.window, "sliding window length (series tasks)");
    cmd->add_option("--downsample", f.downsample, "idx image down-sampling factor");
    cmd->add_option("--train-frac", f.train_fraction, "train split fraction");
    cmd->add_option("--series-length", f.series_length, "sine-mixture series length");
    cmd->add_option("--num-samples", f.num_samples, "freq-class sample count");
    cmd->add_option("--seq-length", f.seq_length, "freq-class sequence length");
  };
  auto add_train_flags = [&](CLI::App* cmd) {
    cmd->add_option("--hidden", f.hidden, "hidden layer sizes")->delimiter(',');
    cmd->add_option("--epochs", f.epochs, "training epochs");
    cmd->add_option("--batch", f.batch_size, "batch size");
    cmd->add_option("--lr", f.learning_rate, "learning rate");
    cmd->add_option("--optimizer", f.optimizer, "adam | sgd");
    cmd->add_option("--loss", f.loss, "auto | mse | cross_entropy");
    cmd->add_option("--clip", f.grad_clip, "global gradient norm clip");
    cmd->add_option("--init-scale", f.init_scale,
                    "uniform init range (0 = 1/sqrt(fan-in))");
    cmd->add_option("--forget-bias", f.forget_bias, "initial forget gate bias");
    cmd->add_option("--checkpoint-every", f.checkpoint_every,
                    "write a checkpoint model file every k epochs (0 = off)");
  };

  CLI::App* cmd_train = app.add_subcommand("train", "train an LSTM on a dataset");
  add_dataset_flags(cmd_train);
  add_train_flags(cmd_train);

  CLI::App* cmd_char =
      app.add_subcommand("characterize", "probe every cell of a trained model");
  cmd_char->add_option("--model", f.model_path, "model file")->required();

  CLI::App* cmd_ablate =
      app.add_subcommand("ablate", "knock out cells one at a time and score the damage");
  cmd_ablate->add_option("--model", f.model_path, "model file")->required();
  add_dataset_flags(cmd_ablate);

  CLI::App* cmd_capacity =
      app.add_subcommand("capacity", "retrain at several sizes and track the metrics");
  cmd_capacity->add_option("--sizes", f.sizes, "network sizes, ascending")->delimiter(',');
  add_dataset_flags(cmd_capacity);
  add_train_flags(cmd_capacity);

  CLI::App* cmd_report = app.add_subcommand("report", "regenerate reports from stored CSVs");
  cmd_report->add_option("--chars", f.chars_path, "characterization.csv");
  cmd_report->add_option("--ablation", f.ablation_path, "ablation.csv");
  cmd_report->add_option("--capacity", f.capacity_path, "capacity.csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    AppConfig cfg;
    if (opt_config->count() > 0) load_config_file(f.config_path, cfg);

    // Flags that were actually provided override the config file.
    if (opt_seed->count()) cfg.train.seed = f.seed;
    if (opt_probe_T->count()) cfg.probe.T = f.probe_T;
    if (opt_step_amp->count()) cfg.probe.step_amplitude = f.step_amp;
    if (opt_sine_freq->count()) cfg.probe.sine_frequency = f.sine_freq;
    if (opt_sine_amp->count()) cfg.probe.sine_amplitude = f.sine_amp;

    auto flag_set = [&](CLI::App* cmd, const std::string& name) {
      const CLI::Option* opt = cmd->get_option_no_throw(name);
      return opt != nullptr && opt->count() > 0;
    };
    auto apply_dataset_flags = [&](CLI::App* cmd) {
      if (flag_set(cmd, "--dataset")) cfg.dataset.kind = f.dataset_kind;
      if (flag_set(cmd, "--data")) cfg.dataset.path = f.data_path;
      if (flag_set(cmd, "--labels")) cfg.dataset.labels_path = f.labels_path;
      if (flag_set(cmd, "--window")) cfg.dataset.window = f.window;
      if (flag_set(cmd, "--downsample")) cfg.dataset.downsample = f.downsample;
      if (flag_set(cmd, "--train-frac")) cfg.dataset.train_fraction = f.train_fraction;
      if (flag_set(cmd, "--series-length")) cfg.dataset.length = f.series_length;
      if (flag_set(cmd, "--num-samples")) cfg.dataset.num_samples = f.num_samples;
      if (flag_set(cmd, "--seq-length")) cfg.dataset.seq_length = f.seq_length;
    };
    auto apply_train_flags = [&](CLI::App* cmd) {
      if (flag_set(cmd, "--hidden")) cfg.hidden = f.hidden;
      if (flag_set(cmd, "--epochs")) cfg.train.epochs = f.epochs;
      if (flag_set(cmd, "--batch")) cfg.train.batch_size = f.batch_size;
      if (flag_set(cmd, "--lr")) cfg.train.learning_rate = f.learning_rate;
      if (flag_set(cmd, "--optimizer"))
        cfg.train.optimizer = optimizer_kind_from_string(f.optimizer);
      if (flag_set(cmd, "--loss") && f.loss != "auto") {
        cfg.train.loss = loss_kind_from_string(f.loss);
        cfg.loss_explicit = true;
      }
      if (flag_set(cmd, "--clip")) cfg.train.grad_clip_norm = f.grad_clip;
      if (flag_set(cmd, "--init-scale")) cfg.train.init_scale = f.init_scale;
      if (flag_set(cmd, "--forget-bias")) cfg.train.forget_bias = f.forget_bias;
      if (flag_set(cmd, "--checkpoint-every"))
        cfg.train.checkpoint_every = f.checkpoint_every;
    };

    const fs::path out_dir(f.out_dir);

    if (cmd_train->parsed()) {
      apply_dataset_flags(cmd_train);
      apply_train_flags(cmd_train);
      ensure_dir(out_dir);
      const Dataset full = build_dataset(cfg.dataset, cfg.train.seed);
      if (full.scale.degenerate)
        std::cerr << "warning: constant input series, all values mapped to 0.5\n";
      const auto [train_set, test_set] = split_train_test(full, cfg.dataset.train_fraction);
      if (!cfg.loss_explicit)
        cfg.train.loss = full.task == TaskKind::Classification ? LossKind::CrossEntropy
                                                               : LossKind::Mse;
      Model model = init_model(cfg.hidden, full.input_dim, full.output_dim, full.task,
                               cfg.train);
      const CheckpointFn checkpoint = [&](const Model& snapshot, std::size_t epoch) {
        save_model(snapshot,
                   (out_dir / ("checkpoint_epoch" + std::to_string(epoch) + ".json"))
                       .string());
      };
      const TrainResult result =
          train(std::move(model), train_set, cfg.train,
                cfg.train.checkpoint_every > 0 ? checkpoint : CheckpointFn{});
      write_loss_history(result.loss_history, out_dir / "train_loss.csv");
      if (result.diverged)
        throw NumericError("training diverged (non-finite loss); history written to " +
                           (out_dir / "train_loss.csv").string());
      Provenance prov;
      prov.seed = cfg.train.seed;
      prov.dataset_id = full.id;
      prov.train_config_hash =
          lstmscope::detail::fnv1a_hex(train_config_canonical(cfg.train, cfg.hidden));
      save_model(result.model, (out_dir / "model.json").string(), prov);
      const double score = evaluate(result.model, test_set, full.task);
      std::cout << "trained " << cfg.hidden.size() << "-layer model on " << full.id
                << ": final train loss "
                << (result.loss_history.empty() ? 0.0 : result.loss_history.back())
                << ", test score " << score << "\n";
      std::cout << "model written to " << (out_dir / "model.json").string() << "\n";
    } else if (cmd_char->parsed()) {
      ensure_dir(out_dir);
      const Model model = load_model(f.model_path);
      const auto chars = characterize_network(model, cfg.probe);
      write_characterization_csv(chars, (out_dir / "characterization.csv").string());
      write_characterization_json(chars, (out_dir / "characterization.json").string());
      write_text(out_dir / "summary.txt", summary_text(chars));
      emit_ranked_bar_plots(chars, out_dir / "plots");
      emit_heatmap(model, chars, cfg.probe, out_dir / "plots" / "heatmap.svg");
      std::cout << summary_text(chars);
      std::cout << "reports written to " << out_dir.string() << "\n";
    } else if (cmd_ablate->parsed()) {
      apply_dataset_flags(cmd_ablate);
      ensure_dir(out_dir);
      const Model model = load_model(f.model_path);
      const Dataset full = build_dataset(cfg.dataset, cfg.train.seed);
      const auto [train_set, test_set] = split_train_test(full, cfg.dataset.train_fraction);
      const auto records = ablation_sweep(model, test_set);
      const auto chars = characterize_network(model, cfg.probe);
      write_ablation_csv(records, (out_dir / "ablation.csv").string());
      nlohmann::ordered_json spearman_doc;
      for (const std::string metric :
           {"settling_time", "delta_response", "amplitude", "correlation", "frequency"})
        spearman_doc[metric] = impact_metric_correlation(records, chars, metric);
      write_text(out_dir / "spearman.json", spearman_doc.dump(2) + "\n");
      emit_ablation_plots(records, chars, cfg.report.moving_average_window,
                          out_dir / "plots");
      std::cout << "baseline score " << records.front().baseline_score << " over "
                << test_set.samples.size() << " held-out samples\n";
      std::cout << "spearman(|metric|, impact): " << spearman_doc.dump() << "\n";
    } else if (cmd_capacity->parsed()) {
      apply_dataset_flags(cmd_capacity);
      apply_train_flags(cmd_capacity);
      if (flag_set(cmd_capacity, "--sizes")) cfg.capacity_sizes = f.sizes;
      ensure_dir(out_dir);
      const Dataset full = build_dataset(cfg.dataset, cfg.train.seed);
      const auto [train_set, test_set] = split_train_test(full, cfg.dataset.train_fraction);
      if (!cfg.loss_explicit)
        cfg.train.loss = full.task == TaskKind::Classification ? LossKind::CrossEntropy
                                                               : LossKind::Mse;
      const auto points =
          capacity_sweep(cfg.capacity_sizes, train_set, test_set, cfg.train, cfg.probe);
      write_capacity_csv(points, (out_dir / "capacity.csv").string());
      emit_capacity_plots(points, out_dir / "plots");
      for (const auto& pt : points) {
        if (pt.ok)
          std::cout << "N=" << pt.N << "  |amplitude| "
                    << format_mean_std(pt.abs_amplitude.mean, pt.abs_amplitude.stddev)
                    << "  score " << pt.score << "\n";
        else
          std::cout << "N=" << pt.N << "  training diverged\n";
      }
    } else if (cmd_report->parsed()) {
      require(!f.chars_path.empty() || !f.capacity_path.empty(),
              "report: need at least --chars or --capacity");
      ensure_dir(out_dir);
      std::vector<CellCharacterization> chars;
      if (!f.chars_path.empty()) {
        chars = read_characterization_csv(f.chars_path);
        write_text(out_dir / "summary.txt", summary_text(chars));
        emit_ranked_bar_plots(chars, out_dir / "plots");
        std::cout << summary_text(chars);
      }
      if (!f.ablation_path.empty()) {
        require(!chars.empty(), "report: --ablation needs --chars for the ranking");
        const auto records = read_ablation_csv(f.ablation_path);
        require(records.size() == chars.size(),
                "report: ablation and characterization row counts differ");
        emit_ablation_plots(records, chars, cfg.report.moving_average_window,
                            out_dir / "plots");
      }
      if (!f.capacity_path.empty()) {
        const auto points = read_capacity_csv(f.capacity_path);
        emit_capacity_plots(points, out_dir / "plots");
      }
      std::cout << "reports written to " << out_dir.string() << "\n";
    }
    return 0;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
