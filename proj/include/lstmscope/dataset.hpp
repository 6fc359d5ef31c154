#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "lstmscope/errors.hpp"
#include "lstmscope/linalg.hpp"
#include "lstmscope/lstm.hpp"

namespace lstmscope {

// One training/evaluation sample: a sequence of per-step input vectors plus
// either a regression target or a class label.
struct Sample {
  std::vector<Vec> steps;
  Vec target;      // regression
  int label = -1;  // classification
};

struct ScaleParams {
  double min = 0.0;
  double max = 1.0;
  bool degenerate = false;  // constant source series, everything mapped to 0.5
};

struct Dataset {
  TaskKind task = TaskKind::Regression;
  std::size_t input_dim = 1;
  std::size_t output_dim = 1;  // p for regression, class count for classification
  std::vector<Sample> samples;
  ScaleParams scale;
  std::string id;  // provenance tag for reports
};

namespace detail {

inline ScaleParams fit_min_max(const Vec& values) {
  ScaleParams sp;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  sp.min = *lo;
  sp.max = *hi;
  sp.degenerate = !(*hi > *lo);
  return sp;
}

inline double apply_scale(double v, const ScaleParams& sp) {
  if (sp.degenerate) return 0.5;
  return (v - sp.min) / (sp.max - sp.min);
}

// Sliding one-step-ahead windows over an already scaled series.
inline void window_series(const Vec& scaled, std::size_t window, Dataset& out) {
  for (std::size_t i = 0; i + window < scaled.size(); ++i) {
    Sample s;
    s.steps.reserve(window);
    for (std::size_t j = 0; j < window; ++j) s.steps.push_back({scaled[i + j]});
    s.target = {scaled[i + window]};
    out.samples.push_back(std::move(s));
  }
}

inline std::uint32_t read_be_u32(std::istream& in, const std::string& path) {
  unsigned char bytes[4];
  in.read(reinterpret_cast<char*>(bytes), 4);
  require(static_cast<bool>(in), "idx file truncated: " + path);
  return (std::uint32_t(bytes[0]) << 24) | (std::uint32_t(bytes[1]) << 16) |
         (std::uint32_t(bytes[2]) << 8) | std::uint32_t(bytes[3]);
}

}  // namespace detail

// Single-column numeric CSV (optional header line) -> sliding windows of
// `window` values with the next value as target, min-max scaled to [0,1].
// A constant series is degenerate: every value maps to 0.5 and the scale
// params carry the flag so callers can warn.
inline Dataset load_series_csv(const std::string& path, std::size_t window) {
  require(window >= 1, "load_series_csv: window must be >= 1");
  std::ifstream in(path);
  require(static_cast<bool>(in), "cannot open series file: " + path);
  Vec values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    std::size_t start = line.find_first_not_of(" \t");
    if (start == std::string::npos) continue;
    const std::string body = line.substr(start);
    try {
      std::size_t consumed = 0;
      const double v = std::stod(body, &consumed);
      require(consumed == body.size(),
              "load_series_csv: trailing characters on line " + std::to_string(line_no));
      require(std::isfinite(v),
              "load_series_csv: non-finite value at line " + std::to_string(line_no));
      values.push_back(v);
    } catch (const InputError&) {
      throw;
    } catch (const std::exception&) {
      if (line_no == 1 && values.empty()) continue;  // header
      throw InputError("load_series_csv: non-numeric row at line " +
                       std::to_string(line_no) + " of " + path);
    }
  }
  require(values.size() >= window + 1,
          "load_series_csv: need at least " + std::to_string(window + 1) +
              " rows, got " + std::to_string(values.size()));

  Dataset ds;
  ds.task = TaskKind::Regression;
  ds.input_dim = 1;
  ds.output_dim = 1;
  ds.id = "csv:" + path;
  ds.scale = detail::fit_min_max(values);
  Vec scaled(values.size());
  for (std::size_t i = 0; i < values.size(); ++i)
    scaled[i] = detail::apply_scale(values[i], ds.scale);
  detail::window_series(scaled, window, ds);
  return ds;
}

// IDX image/label pair -> one scalar sequence per image by stacking pixel
// rows, values scaled to [0,1]. downsample > 1 mean-pools square blocks
// first (e.g. 2 turns 28x28 into 14x14, sequence length 196).
inline Dataset load_row_stacked_images(const std::string& path_images,
                                       const std::string& path_labels,
                                       std::size_t downsample = 1) {
  require(downsample >= 1, "load_row_stacked_images: downsample must be >= 1");
  std::ifstream imgs(path_images, std::ios::binary);
  require(static_cast<bool>(imgs), "cannot open image file: " + path_images);
  std::ifstream lbls(path_labels, std::ios::binary);
  require(static_cast<bool>(lbls), "cannot open label file: " + path_labels);

  const std::uint32_t img_magic = detail::read_be_u32(imgs, path_images);
  require(img_magic == 0x00000803u,
          "idx image magic mismatch: expected 2051, actual " + std::to_string(img_magic));
  const std::uint32_t img_count = detail::read_be_u32(imgs, path_images);
  const std::uint32_t height = detail::read_be_u32(imgs, path_images);
  const std::uint32_t width = detail::read_be_u32(imgs, path_images);

  const std::uint32_t lbl_magic = detail::read_be_u32(lbls, path_labels);
  require(lbl_magic == 0x00000801u,
          "idx label magic mismatch: expected 2049, actual " + std::to_string(lbl_magic));
  const std::uint32_t lbl_count = detail::read_be_u32(lbls, path_labels);
  require(img_count == lbl_count,
          "idx count mismatch: " + std::to_string(img_count) + " images vs " +
              std::to_string(lbl_count) + " labels");
  require(height % downsample == 0 && width % downsample == 0,
          "load_row_stacked_images: downsample factor must divide image size");

  Dataset ds;
  ds.task = TaskKind::Classification;
  ds.input_dim = 1;
  ds.id = "idx:" + path_images;
  ds.scale = {0.0, 255.0, false};
  const std::size_t pixels = std::size_t(height) * std::size_t(width);
  std::vector<unsigned char> buf(pixels);
  const std::size_t oh = height / downsample, ow = width / downsample;
  int max_label = 0;
  for (std::uint32_t s = 0; s < img_count; ++s) {
    imgs.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(pixels));
    require(static_cast<bool>(imgs), "idx file truncated: " + path_images);
    char lbl = 0;
    lbls.read(&lbl, 1);
    require(static_cast<bool>(lbls), "idx file truncated: " + path_labels);

    Sample sample;
    sample.label = static_cast<unsigned char>(lbl);
    max_label = std::max(max_label, sample.label);
    sample.steps.reserve(oh * ow);
    for (std::size_t r = 0; r < oh; ++r) {
      for (std::size_t c = 0; c < ow; ++c) {
        double acc = 0.0;
        for (std::size_t dr = 0; dr < downsample; ++dr)
          for (std::size_t dc = 0; dc < downsample; ++dc)
            acc += buf[(r * downsample + dr) * width + (c * downsample + dc)];
        sample.steps.push_back(
            {acc / (255.0 * static_cast<double>(downsample * downsample))});
      }
    }
    ds.samples.push_back(std::move(sample));
  }
  ds.output_dim = static_cast<std::size_t>(max_label) + 1;
  return ds;
}

// Built-in forecasting task: a fixed three-component sine mixture,
// min-max scaled, one-step-ahead sliding windows. Deterministic; the seed
// only enters via training.
inline Dataset make_sine_mixture(std::size_t length = 480, std::size_t window = 24) {
  require(length >= window + 2, "make_sine_mixture: series too short for window");
  Vec series(length);
  for (std::size_t i = 0; i < length; ++i) {
    const double t = static_cast<double>(i + 1);
    series[i] = 0.6 * std::sin(2.0 * std::numbers::pi * 0.020 * t) +
                0.3 * std::sin(2.0 * std::numbers::pi * 0.050 * t + 1.3) +
                0.1 * std::sin(2.0 * std::numbers::pi * 0.110 * t + 2.1);
  }
  Dataset ds;
  ds.task = TaskKind::Regression;
  ds.input_dim = 1;
  ds.output_dim = 1;
  ds.id = "sine-mixture";
  ds.scale = detail::fit_min_max(series);
  Vec scaled(series.size());
  for (std::size_t i = 0; i < series.size(); ++i)
    scaled[i] = detail::apply_scale(series[i], ds.scale);
  detail::window_series(scaled, window, ds);
  return ds;
}

// Built-in classification task: two classes discriminated by sine
// frequency, random phase per sample, amplitudes scaled to [0,1].
inline Dataset make_freq_classification(std::size_t num_samples = 200,
                                        std::size_t seq_length = 30,
                                        double f0 = 0.05, double f1 = 0.125,
                                        std::uint64_t seed = 42) {
  require(num_samples >= 2, "make_freq_classification: need at least 2 samples");
  require(seq_length >= 4, "make_freq_classification: sequence too short");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  Dataset ds;
  ds.task = TaskKind::Classification;
  ds.input_dim = 1;
  ds.output_dim = 2;
  ds.id = "freq-class";
  ds.scale = {-1.0, 1.0, false};
  for (std::size_t s = 0; s < num_samples; ++s) {
    const int label = static_cast<int>(s % 2);
    const double f = label == 0 ? f0 : f1;
    const double phi = phase(rng);
    Sample sample;
    sample.label = label;
    sample.steps.reserve(seq_length);
    for (std::size_t t = 1; t <= seq_length; ++t) {
      const double raw =
          std::sin(2.0 * std::numbers::pi * f * static_cast<double>(t) + phi);
      sample.steps.push_back({detail::apply_scale(raw, ds.scale)});
    }
    ds.samples.push_back(std::move(sample));
  }
  return ds;
}

// Deterministic contiguous split; the built-in generators interleave
// classes, so both halves stay balanced.
inline std::pair<Dataset, Dataset> split_train_test(const Dataset& ds,
                                                    double train_fraction = 0.8) {
  require(train_fraction > 0.0 && train_fraction < 1.0,
          "split_train_test: fraction must lie in (0, 1)");
  require(ds.samples.size() >= 2, "split_train_test: need at least 2 samples");
  std::size_t cut = static_cast<std::size_t>(
      std::floor(train_fraction * static_cast<double>(ds.samples.size())));
  cut = std::clamp<std::size_t>(cut, 1, ds.samples.size() - 1);
  Dataset train = ds, test = ds;
  train.samples.assign(ds.samples.begin(), ds.samples.begin() + static_cast<std::ptrdiff_t>(cut));
  test.samples.assign(ds.samples.begin() + static_cast<std::ptrdiff_t>(cut), ds.samples.end());
  return {std::move(train), std::move(test)};
}

}  // namespace lstmscope
