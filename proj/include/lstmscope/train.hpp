#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "lstmscope/dataset.hpp"
#include "lstmscope/errors.hpp"
#include "lstmscope/linalg.hpp"
#include "lstmscope/lstm.hpp"

namespace lstmscope {

enum class LossKind { CrossEntropy, Mse };
enum class OptimizerKind { Sgd, Adam };

inline std::string to_string(LossKind k) {
  return k == LossKind::CrossEntropy ? "cross_entropy" : "mse";
}
inline std::string to_string(OptimizerKind k) {
  return k == OptimizerKind::Adam ? "adam" : "sgd";
}
inline LossKind loss_kind_from_string(const std::string& s) {
  if (s == "cross_entropy") return LossKind::CrossEntropy;
  if (s == "mse") return LossKind::Mse;
  throw InputError("unknown loss kind: \"" + s + "\"");
}
inline OptimizerKind optimizer_kind_from_string(const std::string& s) {
  if (s == "sgd") return OptimizerKind::Sgd;
  if (s == "adam") return OptimizerKind::Adam;
  throw InputError("unknown optimizer kind: \"" + s + "\"");
}

struct TrainConfig {
  std::uint64_t seed = 42;
  std::size_t epochs = 150;
  std::size_t batch_size = 16;
  double learning_rate = 1e-3;
  OptimizerKind optimizer = OptimizerKind::Adam;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double grad_clip_norm = 1.0;
  LossKind loss = LossKind::Mse;
  double init_scale = 0.0;   // <= 0: 1/sqrt(fan-in) per tensor
  double forget_bias = 0.0;  // added to the f-gate bias block at init
  std::size_t checkpoint_every = 0;  // epochs; 0 = no checkpoints

  void validate() const {
    require(batch_size >= 1, "TrainConfig: batch_size must be >= 1");
    require(learning_rate > 0.0, "TrainConfig: learning_rate must be positive");
    require(beta1 > 0.0 && beta1 < 1.0 && beta2 > 0.0 && beta2 < 1.0,
            "TrainConfig: adam betas must lie in (0, 1)");
    require(epsilon > 0.0, "TrainConfig: epsilon must be positive");
    require(grad_clip_norm > 0.0, "TrainConfig: grad_clip_norm must be positive");
  }
};

// Gradient holder shaped exactly like the model's parameters.
struct Gradients {
  std::vector<Matrix> W;
  std::vector<Vec> b;
  Matrix head_weights;
  Vec head_bias;

  static Gradients zeros_like(const Model& model) {
    Gradients g;
    g.W.reserve(model.layers.size());
    g.b.reserve(model.layers.size());
    for (const auto& l : model.layers) {
      g.W.emplace_back(l.W.rows, l.W.cols, 0.0);
      g.b.emplace_back(l.b.size(), 0.0);
    }
    g.head_weights = Matrix(model.head_weights.rows, model.head_weights.cols, 0.0);
    g.head_bias.assign(model.head_bias.size(), 0.0);
    return g;
  }

  double squared_norm() const {
    double acc = 0.0;
    for (const auto& w : W)
      for (double v : w.data) acc += v * v;
    for (const auto& bias : b)
      for (double v : bias) acc += v * v;
    for (double v : head_weights.data) acc += v * v;
    for (double v : head_bias) acc += v * v;
    return acc;
  }

  void scale(double s) {
    for (auto& w : W)
      for (double& v : w.data) v *= s;
    for (auto& bias : b)
      for (double& v : bias) v *= s;
    for (double& v : head_weights.data) v *= s;
    for (double& v : head_bias) v *= s;
  }

  void add(const Gradients& other) {
    for (std::size_t l = 0; l < W.size(); ++l) {
      for (std::size_t k = 0; k < W[l].data.size(); ++k) W[l].data[k] += other.W[l].data[k];
      for (std::size_t k = 0; k < b[l].size(); ++k) b[l][k] += other.b[l][k];
    }
    for (std::size_t k = 0; k < head_weights.data.size(); ++k)
      head_weights.data[k] += other.head_weights.data[k];
    for (std::size_t k = 0; k < head_bias.size(); ++k) head_bias[k] += other.head_bias[k];
  }

  void reset() {
    for (auto& w : W) std::fill(w.data.begin(), w.data.end(), 0.0);
    for (auto& bias : b) std::fill(bias.begin(), bias.end(), 0.0);
    std::fill(head_weights.data.begin(), head_weights.data.end(), 0.0);
    std::fill(head_bias.begin(), head_bias.end(), 0.0);
  }
};

// Uniform(-r, r) initialization with r = 1/sqrt(fan-in) per tensor unless
// config.init_scale overrides. Biases start at zero except for the optional
// forget-gate offset. Draw order is fixed, so a seed pins every weight.
inline Model init_model(const std::vector<std::size_t>& hidden_sizes,
                        std::size_t input_dim, std::size_t output_dim,
                        TaskKind task, const TrainConfig& config) {
  require(!hidden_sizes.empty(), "init_model: need at least one layer size");
  require(input_dim >= 1 && output_dim >= 1, "init_model: dimensions must be positive");
  for (std::size_t n : hidden_sizes)
    require(n >= 1, "init_model: layer sizes must be positive");

  std::mt19937_64 rng(config.seed);
  auto draw = [&](std::size_t count, double r) {
    std::uniform_real_distribution<double> dist(-r, r);
    Vec out(count);
    for (double& v : out) v = dist(rng);
    return out;
  };

  Model model;
  model.task_kind = task;
  std::size_t m = input_dim;
  for (std::size_t l = 0; l < hidden_sizes.size(); ++l) {
    const std::size_t n = hidden_sizes[l];
    LstmParams p;
    p.n = n;
    p.m = m;
    p.layer_index = static_cast<int>(l) + 1;
    const double r = config.init_scale > 0.0
                         ? config.init_scale
                         : 1.0 / std::sqrt(static_cast<double>(m + n));
    p.W = Matrix(4 * n, m + n);
    p.W.data = draw(p.W.size(), r);
    p.b.assign(4 * n, 0.0);
    for (std::size_t u = 0; u < n; ++u) p.b[2 * n + u] = config.forget_bias;
    model.layers.push_back(std::move(p));
    m = n;
  }
  const std::size_t n_last = hidden_sizes.back();
  const double rh = config.init_scale > 0.0
                        ? config.init_scale
                        : 1.0 / std::sqrt(static_cast<double>(n_last));
  model.head_weights = Matrix(output_dim, n_last);
  model.head_weights.data = draw(model.head_weights.size(), rh);
  model.head_bias.assign(output_dim, 0.0);
  return model;
}

namespace detail {

// Per-layer forward cache for one sample: gate activations, cell state,
// tanh(c) and the (post-mask) output state at every step.
struct LayerCache {
  std::vector<Vec> z, i, f, o, c, tanh_c, y;
};

}  // namespace detail

// Exact reverse-mode gradients of the mean batch loss with respect to every
// layer weight/bias and the head parameters. Full backpropagation through
// time, no truncation. Masked cells contribute nothing: their output is
// forced to zero in the forward pass and the corresponding adjoint is cut.
inline Gradients bptt_gradients(const Model& model, const std::vector<Sample>& batch,
                                LossKind loss, double* loss_out = nullptr) {
  require(!batch.empty(), "bptt_gradients: empty batch");
  const std::size_t T = batch.front().steps.size();
  require(T >= 1, "bptt_gradients: empty sequence in batch");
  for (const Sample& s : batch) {
    require(s.steps.size() == T, "bptt_gradients: batch sequences must share one length");
    for (const Vec& x : s.steps) {
      require(x.size() == model.input_dim(), "bptt_gradients: sample input dimension mismatch");
      if (!all_finite(x)) throw NumericError("bptt_gradients: non-finite sample input");
    }
  }
  if (loss == LossKind::Mse)
    for (const Sample& s : batch)
      require(s.target.size() == model.output_dim(),
              "bptt_gradients: target length mismatch");
  if (loss == LossKind::CrossEntropy)
    for (const Sample& s : batch)
      require(s.label >= 0 && s.label < static_cast<int>(model.output_dim()),
              "bptt_gradients: label out of range");

  const std::size_t L = model.layers.size();
  const double inv_batch = 1.0 / static_cast<double>(batch.size());
  Gradients grads = Gradients::zeros_like(model);
  // Per-sample buffer reduced into grads in sample order: the fixed
  // reduction order keeps batch gradients reproducible and makes a
  // duplicated sample contribute exactly its half twice.
  Gradients sample_grads = Gradients::zeros_like(model);
  double total_loss = 0.0;

  std::vector<detail::LayerCache> caches(L);
  for (const Sample& sample : batch) {
    sample_grads.reset();
    // Forward with caches.
    const std::vector<Vec>* input = &sample.steps;
    std::vector<Vec> buffer;
    for (std::size_t l = 0; l < L; ++l) {
      const LstmParams& p = model.layers[l];
      const bool has_mask = l < model.output_masks.size() && !model.output_masks[l].empty();
      detail::LayerCache& cache = caches[l];
      cache.z.assign(T, Vec(p.n));
      cache.i.assign(T, Vec(p.n));
      cache.f.assign(T, Vec(p.n));
      cache.o.assign(T, Vec(p.n));
      cache.c.assign(T, Vec(p.n));
      cache.tanh_c.assign(T, Vec(p.n));
      cache.y.assign(T, Vec(p.n));
      Vec c_prev(p.n, 0.0), y_prev(p.n, 0.0);
      const std::size_t width = p.m + p.n;
      for (std::size_t t = 0; t < T; ++t) {
        const Vec& x = (*input)[t];
        for (std::size_t u = 0; u < p.n; ++u) {
          double a[4];
          for (std::size_t g = 0; g < 4; ++g) {
            const std::size_t row = g * p.n + u;
            const double* w = p.W.data.data() + row * width;
            double acc = p.b[row];
            for (std::size_t j = 0; j < p.m; ++j) acc += w[j] * x[j];
            for (std::size_t k = 0; k < p.n; ++k) acc += w[p.m + k] * y_prev[k];
            a[g] = acc;
          }
          const double z = std::tanh(a[0]);
          const double gi = logistic(a[1]);
          const double gf = logistic(a[2]);
          const double go = logistic(a[3]);
          const double c = z * gi + gf * c_prev[u];
          const double th = std::tanh(c);
          cache.z[t][u] = z;
          cache.i[t][u] = gi;
          cache.f[t][u] = gf;
          cache.o[t][u] = go;
          cache.c[t][u] = c;
          cache.tanh_c[t][u] = th;
          cache.y[t][u] = go * th;
        }
        if (has_mask) {
          const auto& mask = model.output_masks[l];
          for (std::size_t u = 0; u < p.n; ++u)
            if (mask[u]) cache.y[t][u] = 0.0;
        }
        c_prev = cache.c[t];
        y_prev = cache.y[t];
      }
      if (l + 1 < L) buffer = cache.y;
      input = &buffer;
    }

    // Head + loss on the final step.
    const Vec& y_last = caches[L - 1].y[T - 1];
    Vec pred = matvec(model.head_weights, y_last);
    for (std::size_t j = 0; j < pred.size(); ++j) pred[j] += model.head_bias[j];

    Vec dpred(pred.size(), 0.0);
    double sample_loss = 0.0;
    if (loss == LossKind::Mse) {
      const double inv_p = 1.0 / static_cast<double>(pred.size());
      for (std::size_t j = 0; j < pred.size(); ++j) {
        const double d = pred[j] - sample.target[j];
        sample_loss += d * d * inv_p;
        dpred[j] = 2.0 * d * inv_p;
      }
    } else {
      double max_logit = pred[0];
      for (double v : pred) max_logit = std::max(max_logit, v);
      double denom = 0.0;
      for (double v : pred) denom += std::exp(v - max_logit);
      const double log_denom = std::log(denom) + max_logit;
      sample_loss = log_denom - pred[static_cast<std::size_t>(sample.label)];
      for (std::size_t j = 0; j < pred.size(); ++j)
        dpred[j] = std::exp(pred[j] - log_denom);
      dpred[static_cast<std::size_t>(sample.label)] -= 1.0;
    }
    if (!std::isfinite(sample_loss))
      throw NumericError("bptt_gradients: non-finite loss (diverged forward pass)");
    total_loss += sample_loss * inv_batch;
    for (double& v : dpred) v *= inv_batch;

    for (std::size_t j = 0; j < dpred.size(); ++j) {
      sample_grads.head_bias[j] += dpred[j];
      for (std::size_t k = 0; k < y_last.size(); ++k)
        sample_grads.head_weights(j, k) += dpred[j] * y_last[k];
    }

    // Backward, top layer first; dy_above[t] collects the adjoint flowing
    // into this layer's output state from the layer above (or the head).
    std::vector<Vec> dy_above(T, Vec(model.layers[L - 1].n, 0.0));
    for (std::size_t j = 0; j < dpred.size(); ++j)
      for (std::size_t k = 0; k < model.layers[L - 1].n; ++k)
        dy_above[T - 1][k] += model.head_weights(j, k) * dpred[j];

    for (std::size_t li = L; li-- > 0;) {
      const LstmParams& p = model.layers[li];
      const detail::LayerCache& cache = caches[li];
      const bool has_mask =
          li < model.output_masks.size() && !model.output_masks[li].empty();
      const std::vector<Vec>* x_seq = li == 0 ? &sample.steps : &caches[li - 1].y;
      const std::size_t width = p.m + p.n;

      std::vector<Vec> dx(T, Vec(p.m, 0.0));
      Vec dc_next(p.n, 0.0), dy_rec(p.n, 0.0);
      Vec da(4 * p.n, 0.0);
      for (std::size_t t = T; t-- > 0;) {
        const Vec& x = (*x_seq)[t];
        const Vec* y_prev = t > 0 ? &cache.y[t - 1] : nullptr;
        const Vec* c_prev = t > 0 ? &cache.c[t - 1] : nullptr;
        for (std::size_t u = 0; u < p.n; ++u) {
          double dy = dy_above[t][u] + dy_rec[u];
          if (has_mask && model.output_masks[li][u]) dy = 0.0;  // forced zero output
          const double o = cache.o[t][u];
          const double th = cache.tanh_c[t][u];
          const double dout = dy * th;            // d a_o pre-sigmoid-derivative
          const double dc = dy * o * (1.0 - th * th) + dc_next[u];
          const double z = cache.z[t][u];
          const double gi = cache.i[t][u];
          const double gf = cache.f[t][u];
          const double cp = c_prev ? (*c_prev)[u] : 0.0;
          da[0 * p.n + u] = dc * gi * (1.0 - z * z);
          da[1 * p.n + u] = dc * z * gi * (1.0 - gi);
          da[2 * p.n + u] = dc * cp * gf * (1.0 - gf);
          da[3 * p.n + u] = dout * o * (1.0 - o);
          dc_next[u] = dc * gf;
        }
        // Accumulate parameter gradients and push adjoints to x and y_prev.
        std::fill(dy_rec.begin(), dy_rec.end(), 0.0);
        for (std::size_t row = 0; row < 4 * p.n; ++row) {
          const double d = da[row];
          if (d == 0.0) continue;
          double* gw = sample_grads.W[li].data.data() + row * width;
          const double* w = p.W.data.data() + row * width;
          for (std::size_t j = 0; j < p.m; ++j) {
            gw[j] += d * x[j];
            dx[t][j] += d * w[j];
          }
          if (y_prev) {
            for (std::size_t k = 0; k < p.n; ++k) {
              gw[p.m + k] += d * (*y_prev)[k];
              dy_rec[k] += d * w[p.m + k];
            }
          }
          sample_grads.b[li][row] += d;
        }
      }
      if (li > 0) dy_above = std::move(dx);
    }
    grads.add(sample_grads);
  }

  if (loss_out) *loss_out = total_loss;
  return grads;
}

// Forward-only mean batch loss; shared definition for training diagnostics
// and finite-difference checks.
inline double batch_loss(const Model& model, const std::vector<Sample>& batch,
                         LossKind loss) {
  require(!batch.empty(), "batch_loss: empty batch");
  double total = 0.0;
  for (const Sample& s : batch) {
    const Vec pred = network_predict(model, s.steps);
    if (loss == LossKind::Mse) {
      require(s.target.size() == pred.size(), "batch_loss: target length mismatch");
      double acc = 0.0;
      for (std::size_t j = 0; j < pred.size(); ++j) {
        const double d = pred[j] - s.target[j];
        acc += d * d;
      }
      total += acc / static_cast<double>(pred.size());
    } else {
      require(s.label >= 0 && s.label < static_cast<int>(pred.size()),
              "batch_loss: label out of range");
      double max_logit = pred[0];
      for (double v : pred) max_logit = std::max(max_logit, v);
      double denom = 0.0;
      for (double v : pred) denom += std::exp(v - max_logit);
      total += std::log(denom) + max_logit - pred[static_cast<std::size_t>(s.label)];
    }
  }
  return total / static_cast<double>(batch.size());
}

struct TrainResult {
  Model model;
  Vec loss_history;  // mean training loss per epoch
  bool diverged = false;
};

namespace detail {

struct AdamState {
  Gradients m, v;
  std::size_t t = 0;
};

inline void adam_update(Model& model, const Gradients& g, AdamState& state,
                        const TrainConfig& cfg) {
  ++state.t;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
  auto update = [&](double& theta, double& m, double& v, double grad) {
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * grad;
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * grad * grad;
    theta -= cfg.learning_rate * (m / bc1) / (std::sqrt(v / bc2) + cfg.epsilon);
  };
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    for (std::size_t k = 0; k < model.layers[l].W.size(); ++k)
      update(model.layers[l].W.data[k], state.m.W[l].data[k], state.v.W[l].data[k],
             g.W[l].data[k]);
    for (std::size_t k = 0; k < model.layers[l].b.size(); ++k)
      update(model.layers[l].b[k], state.m.b[l][k], state.v.b[l][k], g.b[l][k]);
  }
  for (std::size_t k = 0; k < model.head_weights.size(); ++k)
    update(model.head_weights.data[k], state.m.head_weights.data[k],
           state.v.head_weights.data[k], g.head_weights.data[k]);
  for (std::size_t k = 0; k < model.head_bias.size(); ++k)
    update(model.head_bias[k], state.m.head_bias[k], state.v.head_bias[k],
           g.head_bias[k]);
}

inline void sgd_update(Model& model, const Gradients& g, const TrainConfig& cfg) {
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    for (std::size_t k = 0; k < model.layers[l].W.size(); ++k)
      model.layers[l].W.data[k] -= cfg.learning_rate * g.W[l].data[k];
    for (std::size_t k = 0; k < model.layers[l].b.size(); ++k)
      model.layers[l].b[k] -= cfg.learning_rate * g.b[l][k];
  }
  for (std::size_t k = 0; k < model.head_weights.size(); ++k)
    model.head_weights.data[k] -= cfg.learning_rate * g.head_weights.data[k];
  for (std::size_t k = 0; k < model.head_bias.size(); ++k)
    model.head_bias[k] -= cfg.learning_rate * g.head_bias[k];
}

}  // namespace detail

using CheckpointFn = std::function<void(const Model&, std::size_t epoch)>;

// Mini-batch training with seeded shuffling and global-norm gradient
// clipping. Deterministic: a fixed seed fixes the shuffle stream, batches
// are reduced in sample order, and everything runs on one thread. Loss
// divergence (non-finite) stops training and flags the result; the history
// up to that point is preserved. on_checkpoint fires every
// config.checkpoint_every epochs when both are set.
inline TrainResult train(Model model, const Dataset& dataset, const TrainConfig& config,
                         const CheckpointFn& on_checkpoint = {}) {
  config.validate();
  model.validate();
  require(!dataset.samples.empty(), "train: empty dataset");
  require(dataset.input_dim == model.input_dim(), "train: dataset/model input dimension mismatch");
  if (config.loss == LossKind::CrossEntropy)
    require(model.task_kind == TaskKind::Classification,
            "train: cross_entropy requires a classification model");
  if (config.loss == LossKind::Mse)
    require(model.task_kind == TaskKind::Regression,
            "train: mse requires a regression model");

  TrainResult result;
  // Shuffle stream decoupled from the init stream so architecture changes
  // do not shift batch order.
  std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ull);
  std::vector<std::size_t> order(dataset.samples.size());
  std::iota(order.begin(), order.end(), 0);

  detail::AdamState adam;
  if (config.optimizer == OptimizerKind::Adam) {
    adam.m = Gradients::zeros_like(model);
    adam.v = Gradients::zeros_like(model);
  }

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    std::size_t seen = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      std::vector<Sample> batch;
      batch.reserve(end - start);
      for (std::size_t k = start; k < end; ++k) batch.push_back(dataset.samples[order[k]]);

      double loss_value = 0.0;
      Gradients grads;
      try {
        grads = bptt_gradients(model, batch, config.loss, &loss_value);
      } catch (const NumericError&) {
        result.model = std::move(model);
        result.diverged = true;
        return result;
      }
      if (!std::isfinite(loss_value)) {
        result.model = std::move(model);
        result.diverged = true;
        return result;
      }
      epoch_loss += loss_value * static_cast<double>(end - start);
      seen += end - start;

      const double norm = std::sqrt(grads.squared_norm());
      if (norm > config.grad_clip_norm && norm > 0.0)
        grads.scale(config.grad_clip_norm / norm);

      if (config.optimizer == OptimizerKind::Adam)
        detail::adam_update(model, grads, adam, config);
      else
        detail::sgd_update(model, grads, config);
    }
    result.loss_history.push_back(epoch_loss / static_cast<double>(seen));
    if (on_checkpoint && config.checkpoint_every > 0 &&
        (epoch + 1) % config.checkpoint_every == 0)
      on_checkpoint(model, epoch + 1);
  }
  result.model = std::move(model);
  return result;
}

}  // namespace lstmscope
