#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "lstmscope/ablation.hpp"
#include "lstmscope/dataset.hpp"
#include "lstmscope/errors.hpp"
#include "lstmscope/metrics.hpp"
#include "lstmscope/report.hpp"
#include "lstmscope/train.hpp"

namespace lstmscope {

// Aggregated metric distributions for one network size, plus the test
// score. ok is false when training diverged at that size.
struct CapacityPoint {
  std::size_t N = 0;
  bool ok = false;
  Summary settle, delta, abs_delta, amplitude, abs_amplitude, correlation, frequency;
  double score = 0.0;
};

inline CapacityPoint aggregate_capacity_point(std::size_t N,
                                              const std::vector<CellCharacterization>& chars,
                                              double score) {
  CapacityPoint pt;
  pt.N = N;
  pt.ok = true;
  pt.score = score;
  Vec settle, delta, abs_delta, amp, abs_amp, corr, freq;
  for (const auto& ch : chars) {
    settle.push_back(static_cast<double>(ch.step.settling_time));
    delta.push_back(ch.step.delta_response);
    abs_delta.push_back(std::abs(ch.step.delta_response));
    amp.push_back(ch.sine.amplitude);
    abs_amp.push_back(std::abs(ch.sine.amplitude));
    corr.push_back(ch.sine.correlation);
    freq.push_back(ch.sine.frequency);
  }
  pt.settle = summarize(settle);
  pt.delta = summarize(delta);
  pt.abs_delta = summarize(abs_delta);
  pt.amplitude = summarize(amp);
  pt.abs_amplitude = summarize(abs_amp);
  pt.correlation = summarize(corr);
  pt.frequency = summarize(freq);
  return pt;
}

// Retrains a single-layer network from scratch at every size (seed derived
// as seed xor N), characterizes all cells and aggregates the metric
// distributions. A diverging size is recorded as a failed point and the
// sweep continues.
inline std::vector<CapacityPoint> capacity_sweep(const std::vector<std::size_t>& sizes,
                                                 const Dataset& train_set,
                                                 const Dataset& test_set,
                                                 const TrainConfig& base_config,
                                                 const ProbeConfig& probe) {
  require(!sizes.empty(), "capacity_sweep: empty size list");
  for (std::size_t i = 1; i < sizes.size(); ++i)
    require(sizes[i] > sizes[i - 1],
            "capacity_sweep: sizes must be distinct and ascending");
  require(!train_set.samples.empty() && !test_set.samples.empty(),
          "capacity_sweep: empty dataset");

  std::vector<CapacityPoint> points;
  points.reserve(sizes.size());
  for (std::size_t N : sizes) {
    TrainConfig cfg = base_config;
    cfg.seed = base_config.seed ^ static_cast<std::uint64_t>(N);
    Model model = init_model({N}, train_set.input_dim, train_set.output_dim,
                             train_set.task, cfg);
    const TrainResult result = train(std::move(model), train_set, cfg);
    if (result.diverged) {
      CapacityPoint failed;
      failed.N = N;
      failed.ok = false;
      points.push_back(failed);
      continue;
    }
    const auto chars = characterize_network(result.model, probe);
    const double score = evaluate(result.model, test_set, test_set.task);
    points.push_back(aggregate_capacity_point(N, chars, score));
  }
  return points;
}

inline constexpr const char* kCapacityCsvHeader =
    "N,ok,score,settle_mean,settle_std,delta_mean,delta_std,abs_delta_mean,"
    "abs_delta_std,amplitude_mean,amplitude_std,abs_amplitude_mean,"
    "abs_amplitude_std,correlation_mean,correlation_std,frequency_mean,"
    "frequency_std";

inline void write_capacity_csv(const std::vector<CapacityPoint>& points,
                               const std::string& path) {
  require(!points.empty(), "write_capacity_csv: empty results");
  auto out = detail::open_for_write(path);
  out << kCapacityCsvHeader << "\n";
  for (const auto& pt : points) {
    out << pt.N << "," << (pt.ok ? 1 : 0) << "," << format_double(pt.score);
    for (const Summary* s : {&pt.settle, &pt.delta, &pt.abs_delta, &pt.amplitude,
                             &pt.abs_amplitude, &pt.correlation, &pt.frequency})
      out << "," << format_double(s->mean) << "," << format_double(s->stddev);
    out << "\n";
  }
  require(static_cast<bool>(out), "failed writing " + path);
}

inline std::vector<CapacityPoint> read_capacity_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), "cannot open capacity file: " + path);
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), "empty capacity file: " + path);
  while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
  require(line == kCapacityCsvHeader,
          "capacity file " + path + " has unexpected header");
  std::vector<CapacityPoint> points;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
    if (line.empty()) continue;
    const auto fields = detail::split_csv_line(line);
    require(fields.size() == 17, "capacity file " + path + " line " +
                                     std::to_string(line_no) + " has " +
                                     std::to_string(fields.size()) +
                                     " fields, expected 17");
    CapacityPoint pt;
    pt.N = static_cast<std::size_t>(detail::parse_double_field(fields[0], path, line_no));
    pt.ok = detail::parse_double_field(fields[1], path, line_no) != 0.0;
    pt.score = detail::parse_double_field(fields[2], path, line_no);
    Summary* targets[] = {&pt.settle,        &pt.delta,       &pt.abs_delta,
                          &pt.amplitude,     &pt.abs_amplitude, &pt.correlation,
                          &pt.frequency};
    for (std::size_t s = 0; s < 7; ++s) {
      targets[s]->mean = detail::parse_double_field(fields[3 + 2 * s], path, line_no);
      targets[s]->stddev = detail::parse_double_field(fields[4 + 2 * s], path, line_no);
    }
    points.push_back(pt);
  }
  require(!points.empty(), "capacity file " + path + " has no rows");
  return points;
}

}  // namespace lstmscope
