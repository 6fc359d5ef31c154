#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "lstmscope/dataset.hpp"
#include "lstmscope/errors.hpp"
#include "lstmscope/linalg.hpp"
#include "lstmscope/lstm.hpp"
#include "lstmscope/metrics.hpp"

namespace lstmscope {

// Per-cell knockout result. score is misclassification rate for
// classification and mean absolute error for regression; impact is
// ablated - baseline.
struct AblationRecord {
  std::size_t cell_index = 0;  // flat (layer-major) index
  double baseline_score = 0.0;
  double ablated_score = 0.0;
  double impact = 0.0;
};

// Output-masking knockout: the returned model forces cell u's output state
// to zero at every step. The input model is untouched. Masking silences the
// cell everywhere downstream, which equals zeroing all of its outgoing
// weights (recurrent columns, next-layer input columns, head column).
inline Model ablate_cell(const Model& model, std::size_t layer, std::size_t u) {
  require(layer < model.layers.size(),
          "ablate_cell: layer index " + std::to_string(layer) + " out of range [0, " +
              std::to_string(model.layers.size()) + ")");
  require(u < model.layers[layer].n,
          "ablate_cell: cell index " + std::to_string(u) + " out of range [0, " +
              std::to_string(model.layers[layer].n) + ")");
  Model out = model;
  if (out.output_masks.empty()) {
    out.output_masks.resize(out.layers.size());
    for (std::size_t l = 0; l < out.layers.size(); ++l)
      out.output_masks[l].assign(out.layers[l].n, 0);
  }
  out.output_masks[layer][u] = 1;
  return out;
}

// Task score over a dataset: fraction of argmax-wrong predictions for
// classification, mean over samples of per-sample mean absolute error for
// regression.
inline double evaluate(const Model& model, const Dataset& dataset, TaskKind task) {
  require(!dataset.samples.empty(), "evaluate: empty dataset");
  require(dataset.input_dim == model.input_dim(),
          "evaluate: dataset input dimension " + std::to_string(dataset.input_dim) +
              " does not match model input dimension " +
              std::to_string(model.input_dim()));
  double acc = 0.0;
  for (const Sample& s : dataset.samples) {
    const Vec pred = network_predict(model, s.steps);
    if (task == TaskKind::Classification) {
      std::size_t arg = 0;
      for (std::size_t j = 1; j < pred.size(); ++j)
        if (pred[j] > pred[arg]) arg = j;
      if (static_cast<int>(arg) != s.label) acc += 1.0;
    } else {
      require(s.target.size() == pred.size(),
              "evaluate: target length " + std::to_string(s.target.size()) +
                  " does not match prediction length " + std::to_string(pred.size()));
      double mae = 0.0;
      for (std::size_t j = 0; j < pred.size(); ++j) mae += std::abs(pred[j] - s.target[j]);
      acc += mae / static_cast<double>(pred.size());
    }
  }
  return acc / static_cast<double>(dataset.samples.size());
}

// Knocks out each cell in turn and measures the score change. Records are
// ordered by flat (layer, cell) index; the baseline is evaluated once.
inline std::vector<AblationRecord> ablation_sweep(const Model& model,
                                                  const Dataset& dataset) {
  model.validate();
  const double baseline = evaluate(model, dataset, model.task_kind);
  std::vector<AblationRecord> records;
  records.reserve(model.total_cells());
  std::size_t flat = 0;
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    for (std::size_t u = 0; u < model.layers[l].n; ++u, ++flat) {
      const Model knocked = ablate_cell(model, l, u);
      AblationRecord rec;
      rec.cell_index = flat;
      rec.baseline_score = baseline;
      rec.ablated_score = evaluate(knocked, dataset, model.task_kind);
      rec.impact = rec.ablated_score - rec.baseline_score;
      records.push_back(rec);
    }
  }
  return records;
}

namespace detail {
// Average ranks (ties get the mean of the positions they span), 1-based.
inline Vec average_ranks(const Vec& values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (values[a] != values[b]) return values[a] < values[b];
    return a < b;
  });
  Vec ranks(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double mean_rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = mean_rank;
    i = j + 1;
  }
  return ranks;
}
}  // namespace detail

// Spearman rank correlation with average-tie ranks. Returns 0 when either
// side has no rank variation (no monotone association is expressible).
inline double spearman(const Vec& a, const Vec& b) {
  require(a.size() == b.size(),
          "spearman: length mismatch: " + std::to_string(a.size()) + " vs " +
              std::to_string(b.size()));
  require(a.size() >= 2, "spearman: need at least 2 pairs");
  const Vec ra = detail::average_ranks(a);
  const Vec rb = detail::average_ranks(b);
  const double ma = mean(ra), mb = mean(rb);
  double cov = 0.0, va = 0.0, vb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    const double da = ra[i] - ma, db = rb[i] - mb;
    cov += da * db;
    va += da * da;
    vb += db * db;
  }
  if (va <= 0.0 || vb <= 0.0) return 0.0;
  return cov / std::sqrt(va * vb);
}

// Spearman rho between a response metric and ablation impact across the
// cell set. delta_response and amplitude enter by absolute value: both
// tails of those distributions mark strong contributors.
inline double impact_metric_correlation(const std::vector<AblationRecord>& records,
                                        const std::vector<CellCharacterization>& chars,
                                        const std::string& metric) {
  require(records.size() == chars.size(),
          "impact_metric_correlation: record/characterization count mismatch: " +
              std::to_string(records.size()) + " vs " + std::to_string(chars.size()));
  require(records.size() >= 3, "impact_metric_correlation: need at least 3 cells");
  const bool use_abs = metric == "delta_response" || metric == "delta" ||
                       metric == "amplitude";
  Vec metric_values(chars.size()), impacts(records.size());
  for (std::size_t i = 0; i < chars.size(); ++i) {
    const double v = metric_value(chars[i], metric);
    metric_values[i] = use_abs ? std::abs(v) : v;
    impacts[i] = records[i].impact;
  }
  return spearman(metric_values, impacts);
}

}  // namespace lstmscope
