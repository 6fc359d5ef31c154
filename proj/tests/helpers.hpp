#pragma once

// Shared generators for the test suites. Everything is seeded explicitly;
// no test draws from a nondeterministic source.

#include <cstddef>
#include <random>
#include <vector>

#include "lstmscope/lstm.hpp"

namespace testutil {

using lstmscope::LstmParams;
using lstmscope::Matrix;
using lstmscope::Model;
using lstmscope::TaskKind;
using lstmscope::Vec;

inline LstmParams random_params(std::mt19937_64& rng, std::size_t n, std::size_t m,
                                double scale = 1.0) {
  std::uniform_real_distribution<double> dist(-scale, scale);
  LstmParams p;
  p.n = n;
  p.m = m;
  p.W = Matrix(4 * n, m + n);
  for (double& v : p.W.data) v = dist(rng);
  p.b.resize(4 * n);
  for (double& v : p.b) v = dist(rng);
  return p;
}

inline std::vector<Vec> random_sequence(std::mt19937_64& rng, std::size_t T,
                                        std::size_t m, double scale = 1.0) {
  std::uniform_real_distribution<double> dist(-scale, scale);
  std::vector<Vec> xs(T, Vec(m));
  for (auto& x : xs)
    for (double& v : x) v = dist(rng);
  return xs;
}

inline Model random_model(std::mt19937_64& rng, const std::vector<std::size_t>& sizes,
                          std::size_t input_dim, std::size_t output_dim,
                          TaskKind task = TaskKind::Regression, double scale = 0.8) {
  std::uniform_real_distribution<double> dist(-scale, scale);
  Model model;
  model.task_kind = task;
  std::size_t m = input_dim;
  for (std::size_t l = 0; l < sizes.size(); ++l) {
    LstmParams p = random_params(rng, sizes[l], m, scale);
    p.layer_index = static_cast<int>(l) + 1;
    model.layers.push_back(std::move(p));
    m = sizes[l];
  }
  model.head_weights = Matrix(output_dim, sizes.back());
  for (double& v : model.head_weights.data) v = dist(rng);
  model.head_bias.resize(output_dim);
  for (double& v : model.head_bias) v = dist(rng);
  return model;
}

// Relabels cells: new cell v takes old cell perm[v]'s weights everywhere
// (gate rows, recurrent columns, head columns). The permuted model's y
// trajectory is the original's with indices relabeled the same way.
inline Model permute_cells(const Model& model, std::size_t layer,
                           const std::vector<std::size_t>& perm) {
  Model out = model;
  const LstmParams& src = model.layers[layer];
  LstmParams& dst = out.layers[layer];
  const std::size_t n = src.n;
  for (std::size_t g = 0; g < 4; ++g) {
    for (std::size_t v = 0; v < n; ++v) {
      const std::size_t src_row = g * n + perm[v];
      const std::size_t dst_row = g * n + v;
      for (std::size_t j = 0; j < src.m; ++j) dst.W(dst_row, j) = src.W(src_row, j);
      for (std::size_t w = 0; w < n; ++w)
        dst.W(dst_row, src.m + w) = src.W(src_row, src.m + perm[w]);
      dst.b[dst_row] = src.b[src_row];
    }
  }
  if (layer + 1 < model.layers.size()) {
    const LstmParams& next_src = model.layers[layer + 1];
    LstmParams& next_dst = out.layers[layer + 1];
    for (std::size_t row = 0; row < next_src.W.rows; ++row)
      for (std::size_t v = 0; v < n; ++v)
        next_dst.W(row, v) = next_src.W(row, perm[v]);
  } else {
    for (std::size_t r = 0; r < model.head_weights.rows; ++r)
      for (std::size_t v = 0; v < n; ++v)
        out.head_weights(r, v) = model.head_weights(r, perm[v]);
  }
  return out;
}

}  // namespace testutil
