#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "lstmscope/errors.hpp"
#include "lstmscope/linalg.hpp"

namespace lstmscope {

enum class Gate : std::size_t { Z = 0, I = 1, F = 2, O = 3 };

// One LSTM layer. Gate weights are stacked as four n-row blocks in z,i,f,o
// order over the concatenated input [x ; y_prev], so W is 4n x (m+n).
// A zero bias reproduces the bias-free cell update exactly.
struct LstmParams {
  std::size_t n = 0;  // cell count
  std::size_t m = 0;  // input dimension
  Matrix W;           // 4n x (m+n)
  Vec b;              // 4n
  int layer_index = 1;

  std::size_t gate_row(Gate g, std::size_t u) const {
    return static_cast<std::size_t>(g) * n + u;
  }

  void validate() const {
    require(n > 0, "LstmParams: cell count must be positive");
    require(m > 0, "LstmParams: input dimension must be positive");
    require(W.rows == 4 * n && W.cols == m + n,
            "LstmParams: weight shape mismatch: expected " +
                std::to_string(4 * n) + "x" + std::to_string(m + n) +
                ", actual " + std::to_string(W.rows) + "x" +
                std::to_string(W.cols));
    require(b.size() == 4 * n,
            "LstmParams: bias length mismatch: expected " +
                std::to_string(4 * n) + ", actual " + std::to_string(b.size()));
    require(layer_index >= 1, "LstmParams: layer_index must be >= 1");
    if (!all_finite(W) || !all_finite(b))
      throw NumericError("LstmParams: non-finite weight or bias entry");
  }
};

struct LstmState {
  Vec c;  // cell state, length n
  Vec y;  // output state, length n

  bool operator==(const LstmState& other) const = default;
};

inline LstmState zero_state(std::size_t n) {
  return LstmState{Vec(n, 0.0), Vec(n, 0.0)};
}

// One step of the cell kinetics:
//   a = W [x ; y_prev] + b,  split into gate blocks (z,i,f,o)
//   z = tanh(a_z), i = sigma(a_i), f = sigma(a_f), o = sigma(a_o)
//   c_new = z*i + f*c_prev
//   y_new = o * tanh(c_new)
inline LstmState lstm_step(const LstmParams& p, const LstmState& state, const Vec& x) {
  require(x.size() == p.m,
          "lstm_step: input length mismatch: expected " + std::to_string(p.m) +
              ", actual " + std::to_string(x.size()));
  require(state.c.size() == p.n && state.y.size() == p.n,
          "lstm_step: state length mismatch: expected " + std::to_string(p.n) +
              ", actual c=" + std::to_string(state.c.size()) + " y=" +
              std::to_string(state.y.size()));
  if (!all_finite(x)) throw NumericError("lstm_step: non-finite input");

  LstmState out{Vec(p.n), Vec(p.n)};
  const std::size_t width = p.m + p.n;
  for (std::size_t u = 0; u < p.n; ++u) {
    double a[4];
    for (std::size_t g = 0; g < 4; ++g) {
      const std::size_t row = g * p.n + u;
      const double* w = p.W.data.data() + row * width;
      double acc = p.b[row];
      for (std::size_t j = 0; j < p.m; ++j) acc += w[j] * x[j];
      for (std::size_t k = 0; k < p.n; ++k) acc += w[p.m + k] * state.y[k];
      a[g] = acc;
    }
    const double z = std::tanh(a[0]);
    const double i = logistic(a[1]);
    const double f = logistic(a[2]);
    const double o = logistic(a[3]);
    const double c = z * i + f * state.c[u];
    out.c[u] = c;
    out.y[u] = o * std::tanh(c);
  }
  return out;
}

// Applies lstm_step over the whole input sequence; element t is the state
// after t+1 steps from init.
inline std::vector<LstmState> lstm_rollout(const LstmParams& p,
                                           const std::vector<Vec>& xs,
                                           const LstmState& init) {
  require(!xs.empty(), "lstm_rollout: empty input sequence");
  std::vector<LstmState> states;
  states.reserve(xs.size());
  LstmState cur = init;
  for (const Vec& x : xs) {
    cur = lstm_step(p, cur, x);
    states.push_back(cur);
  }
  return states;
}

// Vanilla RNN step, h_new = tanh(W [x ; h_prev]) with W of shape n x 2n.
// Provided for comparison; the probing pipeline operates on LSTMs.
inline Vec rnn_step(const Matrix& weights, const Vec& h_prev, const Vec& x) {
  const std::size_t n = weights.rows;
  require(weights.cols == 2 * n,
          "rnn_step: weight shape mismatch: expected " + std::to_string(n) +
              "x" + std::to_string(2 * n) + ", actual " +
              std::to_string(weights.rows) + "x" + std::to_string(weights.cols));
  require(h_prev.size() == n && x.size() == n,
          "rnn_step: vector length mismatch: expected " + std::to_string(n) +
              ", actual h=" + std::to_string(h_prev.size()) + " x=" +
              std::to_string(x.size()));
  Vec h(n, 0.0);
  for (std::size_t u = 0; u < n; ++u) {
    double acc = 0.0;
    const double* w = weights.data.data() + u * weights.cols;
    for (std::size_t j = 0; j < n; ++j) acc += w[j] * x[j];
    for (std::size_t k = 0; k < n; ++k) acc += w[n + k] * h_prev[k];
    h[u] = std::tanh(acc);
  }
  return h;
}

enum class TaskKind { Classification, Regression };

inline std::string to_string(TaskKind k) {
  return k == TaskKind::Classification ? "classification" : "regression";
}

inline TaskKind task_kind_from_string(const std::string& s) {
  if (s == "classification") return TaskKind::Classification;
  if (s == "regression") return TaskKind::Regression;
  throw InputError("unknown task kind: \"" + s + "\"");
}

// Stacked LSTM with an affine readout over the last layer's final output
// state. output_masks, when non-empty, force the flagged cells' output
// state to zero after every step (inference-time knockout); the flagged
// cells' internal c keeps evolving but is never read.
struct Model {
  std::vector<LstmParams> layers;
  Matrix head_weights;  // p x n_last
  Vec head_bias;        // p
  TaskKind task_kind = TaskKind::Regression;
  std::vector<std::vector<std::uint8_t>> output_masks;  // empty = no knockout

  std::size_t input_dim() const { return layers.empty() ? 0 : layers.front().m; }
  std::size_t output_dim() const { return head_bias.size(); }
  std::size_t total_cells() const {
    std::size_t total = 0;
    for (const auto& l : layers) total += l.n;
    return total;
  }

  bool masked(std::size_t layer, std::size_t u) const {
    return layer < output_masks.size() && u < output_masks[layer].size() &&
           output_masks[layer][u] != 0;
  }

  void validate() const {
    require(!layers.empty(), "Model: needs at least one layer");
    for (const auto& l : layers) l.validate();
    for (std::size_t i = 1; i < layers.size(); ++i)
      require(layers[i].m == layers[i - 1].n,
              "Model: layer " + std::to_string(i + 1) +
                  " input dimension " + std::to_string(layers[i].m) +
                  " does not match layer " + std::to_string(i) +
                  " cell count " + std::to_string(layers[i - 1].n));
    require(head_weights.cols == layers.back().n,
            "Model: head column count " + std::to_string(head_weights.cols) +
                " does not match last layer cell count " +
                std::to_string(layers.back().n));
    require(head_weights.rows == head_bias.size(),
            "Model: head row count " + std::to_string(head_weights.rows) +
                " does not match head bias length " +
                std::to_string(head_bias.size()));
    require(head_bias.size() > 0, "Model: head output dimension must be positive");
    if (!all_finite(head_weights) || !all_finite(head_bias))
      throw NumericError("Model: non-finite head entry");
    if (!output_masks.empty()) {
      require(output_masks.size() == layers.size(),
              "Model: output_masks must have one entry per layer");
      for (std::size_t l = 0; l < layers.size(); ++l)
        require(output_masks[l].size() == layers[l].n,
                "Model: output_masks[" + std::to_string(l) + "] length mismatch");
    }
  }
};

// Full rollout of every layer; layer l+1 consumes layer l's output-state
// trajectory. Returns one state sequence per layer, masks applied.
inline std::vector<std::vector<LstmState>> network_forward(const Model& model,
                                                           const std::vector<Vec>& xs) {
  require(!model.layers.empty(), "network_forward: model has no layers");
  require(!xs.empty(), "network_forward: empty input sequence");
  std::vector<std::vector<LstmState>> all;
  all.reserve(model.layers.size());
  const std::vector<Vec>* input = &xs;
  std::vector<Vec> buffer;
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const LstmParams& p = model.layers[l];
    const bool has_mask = l < model.output_masks.size() && !model.output_masks[l].empty();
    std::vector<LstmState> states;
    states.reserve(input->size());
    LstmState cur = zero_state(p.n);
    for (const Vec& x : *input) {
      cur = lstm_step(p, cur, x);
      if (has_mask) {
        const auto& mask = model.output_masks[l];
        for (std::size_t u = 0; u < p.n; ++u)
          if (mask[u]) cur.y[u] = 0.0;
      }
      states.push_back(cur);
    }
    if (l + 1 < model.layers.size()) {
      buffer.clear();
      buffer.reserve(states.size());
      for (const auto& s : states) buffer.push_back(s.y);
    }
    all.push_back(std::move(states));
    input = &buffer;
  }
  return all;
}

// Affine head on the final step's last-layer output state; yields logits
// for classification and predicted values for regression.
inline Vec network_predict(const Model& model, const std::vector<Vec>& xs) {
  const auto traj = network_forward(model, xs);
  const Vec& y_last = traj.back().back().y;
  Vec out = matvec(model.head_weights, y_last);
  for (std::size_t j = 0; j < out.size(); ++j) out[j] += model.head_bias[j];
  return out;
}

}  // namespace lstmscope
