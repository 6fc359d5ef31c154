#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <numbers>
#include <string>
#include <vector>

#include "lstmscope/cell.hpp"
#include "lstmscope/errors.hpp"
#include "lstmscope/linalg.hpp"
#include "lstmscope/lstm.hpp"
#include "lstmscope/signal.hpp"

namespace lstmscope {

// Step-response summary. delta_response is the cell's contribution-strength
// proxy; settling_time counts steps from the input change until the output
// permanently stays inside the 90% band around its final value.
struct StepMetrics {
  double initial_response = 0.0;
  double final_response = 0.0;
  double delta_response = 0.0;
  std::size_t settling_time = 0;
};

// Sinusoid-response summary. amplitude is half the steady-state
// peak-to-peak output, signed by the windowed input-output correlation;
// frequency is the periodogram argmax in cycles/step; correlation is the
// unnormalized centered dot product over the full trace. cyclic is false
// when the windowed output carried no spectral energy at all.
struct SineMetrics {
  double amplitude = 0.0;
  double frequency = 0.0;
  double correlation = 0.0;
  bool cyclic = false;
};

struct CellCharacterization {
  std::size_t layer = 0;  // 0-based position in Model::layers
  std::size_t cell_index = 0;
  StepMetrics step;
  SineMetrics sine;
};

struct PeriodogramBin {
  double frequency;  // cycles/step
  double power;
};

// Plain periodogram of the mean-removed sequence:
//   S(f_k) = |DFT(y - mean(y))[k]|^2 / T,  k = 1 .. floor(T/2)
// The DC bin is excluded by mean removal and by starting at k = 1.
inline std::vector<PeriodogramBin> periodogram(const Vec& y) {
  const std::size_t T = y.size();
  require(T >= 4, "periodogram: sequence length must be >= 4, got " +
                      std::to_string(T));
  const double mu = mean(y);
  std::vector<PeriodogramBin> bins;
  bins.reserve(T / 2);
  for (std::size_t k = 1; k <= T / 2; ++k) {
    double re = 0.0, im = 0.0;
    for (std::size_t j = 0; j < T; ++j) {
      const double phase = -2.0 * std::numbers::pi *
                           static_cast<double>(k) * static_cast<double>(j) /
                           static_cast<double>(T);
      const double v = y[j] - mu;
      re += v * std::cos(phase);
      im += v * std::sin(phase);
    }
    bins.push_back({static_cast<double>(k) / static_cast<double>(T),
                    (re * re + im * im) / static_cast<double>(T)});
  }
  return bins;
}

struct DominantFrequency {
  double frequency = 0.0;
  bool cyclic = false;  // false: spectrum carried no energy
};

// argmax over periodogram bins; ties break toward the lowest frequency.
// An all-zero spectrum carries no cyclic content and reports frequency 0.
inline DominantFrequency dominant_frequency(const std::vector<PeriodogramBin>& bins) {
  double best_power = 0.0;
  double best_freq = 0.0;
  for (const auto& bin : bins) {
    if (bin.power > best_power) {
      best_power = bin.power;
      best_freq = bin.frequency;
    }
  }
  if (best_power <= 0.0) return {0.0, false};
  return {best_freq, true};
}

inline DominantFrequency dominant_frequency(const Vec& y) {
  return dominant_frequency(periodogram(y));
}

// Unnormalized centered dot product: sum_t (x_t - E[x]) (y_t - E[y]).
inline double correlation(const Vec& x, const Vec& y) {
  require(x.size() == y.size(),
          "correlation: length mismatch: " + std::to_string(x.size()) + " vs " +
              std::to_string(y.size()));
  require(!x.empty(), "correlation: empty sequences");
  const double mx = mean(x);
  const double my = mean(y);
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += (x[i] - mx) * (y[i] - my);
  return acc;
}

namespace detail {
// Below this delta magnitude a step response is considered flat: the cell
// never moved, so it has trivially settled.
inline constexpr double kFlatDelta = 1e-6;
}  // namespace detail

// Step metrics per the response definitions:
//  - initial_response: y at the last pre-step instant (t_step - 1)
//  - final_response: mean of the last 10% of post-step samples
//  - settling_time: steps from t_step until the output enters the
//    (1 - band)*|delta| band around the final response and stays inside;
//    last entry counts, not first touch. A trace that never stays inside
//    reports the maximum, T - t_step.
inline StepMetrics step_metrics(const ResponseTrace& trace, double band = 0.9) {
  require(trace.signal.kind == SignalKind::Step,
          "step_metrics: trace was not produced by a step probe");
  require(band > 0.0 && band < 1.0, "step_metrics: band must lie in (0, 1)");
  const std::size_t T = trace.length();
  const std::size_t t_step = trace.signal.t_step;
  require(t_step >= 2 && t_step <= T, "step_metrics: corrupt step instant");
  const std::size_t post_len = T - t_step + 1;
  require(post_len >= 2,
          "step_metrics: post-step segment must have >= 2 samples, got " +
              std::to_string(post_len));

  StepMetrics out;
  out.initial_response = trace.y[t_step - 2];  // t = t_step - 1, 1-based

  const std::size_t tail = std::max<std::size_t>(1, post_len / 10);
  double acc = 0.0;
  for (std::size_t i = T - tail; i < T; ++i) acc += trace.y[i];
  out.final_response = acc / static_cast<double>(tail);
  out.delta_response = out.final_response - out.initial_response;

  if (std::abs(out.delta_response) < detail::kFlatDelta) {
    out.settling_time = 0;
    return out;
  }
  const double tol = (1.0 - band) * std::abs(out.delta_response);
  std::size_t last_violation = 0;  // 1-based; 0 = none
  for (std::size_t t = t_step; t <= T; ++t)
    if (std::abs(trace.y[t - 1] - out.final_response) > tol) last_violation = t;
  if (last_violation == 0) {
    out.settling_time = 0;
  } else {
    const std::size_t settled_at = std::min(last_violation + 1, T);
    out.settling_time = settled_at - t_step;
  }
  return out;
}

// Sine metrics: steady-state window is the last half of the trace.
// amplitude = (max - min)/2 over the window, signed by the windowed
// input-output correlation (0 when that correlation is 0); frequency is the
// dominant frequency of the windowed output; the stored correlation spans
// the full trace.
inline SineMetrics sine_metrics(const ResponseTrace& trace) {
  require(trace.signal.kind == SignalKind::Sine,
          "sine_metrics: trace was not produced by a sine probe");
  const std::size_t T = trace.length();
  require(T >= 8, "sine_metrics: trace length must be >= 8, got " +
                      std::to_string(T));
  const std::size_t ws = T / 2;  // window = indices [ws, T)
  const Vec wy(trace.y.begin() + static_cast<std::ptrdiff_t>(ws), trace.y.end());
  const Vec wx(trace.signal.samples.begin() + static_cast<std::ptrdiff_t>(ws),
               trace.signal.samples.end());

  SineMetrics out;
  const auto [lo, hi] = std::minmax_element(wy.begin(), wy.end());
  const double unsigned_amp = (*hi - *lo) / 2.0;
  const double wcorr = correlation(wx, wy);
  if (wcorr > 0.0)
    out.amplitude = unsigned_amp;
  else if (wcorr < 0.0)
    out.amplitude = -unsigned_amp;
  else
    out.amplitude = 0.0;

  const DominantFrequency df = dominant_frequency(wy);
  out.frequency = df.frequency;
  out.cyclic = df.cyclic;
  out.correlation = correlation(trace.signal.samples, trace.y);
  return out;
}

// Probe design knobs. sine_frequency <= 0 selects the default of 10 whole
// cycles over the probe length (clamped to Nyquist). probe_channel < 0
// broadcasts the scalar probe to every input channel.
struct ProbeConfig {
  std::size_t T = 100;
  double step_amplitude = 1.0;
  double sine_frequency = 0.0;
  double sine_amplitude = 1.0;
  int probe_channel = -1;
  double band = 0.9;

  double effective_sine_frequency() const {
    if (sine_frequency > 0.0) return sine_frequency;
    return std::min(0.5, 10.0 / static_cast<double>(T));
  }
};

// Characterizes every cell of every layer: extract the decoupled subsystem,
// roll it out against both probes, compute both metric sets. Output is
// ordered by (layer, cell_index).
inline std::vector<CellCharacterization> characterize_network(const Model& model,
                                                              const ProbeConfig& probe) {
  model.validate();
  const Signal step = make_step(probe.T, probe.step_amplitude);
  const Signal sine =
      make_sine(probe.T, probe.effective_sine_frequency(), probe.sine_amplitude);
  std::vector<CellCharacterization> chars;
  chars.reserve(model.total_cells());
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const LstmParams& params = model.layers[l];
    for (std::size_t u = 0; u < params.n; ++u) {
      const CellSubsystem sub =
          extract_cell_subsystem(params, u, probe.probe_channel);
      CellCharacterization ch;
      ch.layer = l;
      ch.cell_index = u;
      ch.step = step_metrics(subsystem_rollout(sub, step), probe.band);
      ch.sine = sine_metrics(subsystem_rollout(sub, sine));
      chars.push_back(ch);
    }
  }
  return chars;
}

// Named metric accessor shared by ranking, reporting and the ablation
// comparison. Accepts the canonical names plus the CSV-header spellings.
inline double metric_value(const CellCharacterization& ch, const std::string& metric) {
  if (metric == "settling_time" || metric == "settle_time")
    return static_cast<double>(ch.step.settling_time);
  if (metric == "delta_response" || metric == "delta") return ch.step.delta_response;
  if (metric == "amplitude") return ch.sine.amplitude;
  if (metric == "correlation") return ch.sine.correlation;
  if (metric == "frequency") return ch.sine.frequency;
  throw InputError("unknown metric name: \"" + metric + "\"");
}

enum class SortOrder { Ascending, Descending };

// Stable rank of cells by one metric; ties break by list position, which
// equals (layer, cell_index) order. Returns positions into `chars`.
inline std::vector<std::size_t> rank_cells(const std::vector<CellCharacterization>& chars,
                                           const std::string& metric,
                                           SortOrder order = SortOrder::Ascending) {
  Vec values(chars.size());
  for (std::size_t i = 0; i < chars.size(); ++i) values[i] = metric_value(chars[i], metric);
  std::vector<std::size_t> idx(chars.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (values[a] != values[b])
      return order == SortOrder::Ascending ? values[a] < values[b]
                                           : values[a] > values[b];
    return a < b;
  });
  return idx;
}

struct Summary {
  double mean = 0.0;
  double stddev = 0.0;  // population standard deviation
};

inline Summary summarize(const Vec& values) {
  require(!values.empty(), "summarize: empty value list");
  const double mu = mean(values);
  double acc = 0.0;
  for (double v : values) acc += (v - mu) * (v - mu);
  return {mu, std::sqrt(acc / static_cast<double>(values.size()))};
}

// "M ± S" with two decimals, the layout used by the summary tables.
inline std::string format_mean_std(double mean_value, double stddev_value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f ± %.2f", mean_value, stddev_value);
  return buf;
}

}  // namespace lstmscope
