#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <string>

#include "lstmscope/errors.hpp"
#include "lstmscope/linalg.hpp"
#include "lstmscope/lstm.hpp"
#include "lstmscope/signal.hpp"

namespace lstmscope {

// A single LSTM cell decoupled from its network: scalar state, one
// effective input weight, one self-recurrent weight and one bias per gate
// (z,i,f,o). Cross-cell recurrent couplings are dropped, so its dynamics
// approximate a sub-region of the full network's.
struct CellSubsystem {
  std::size_t cell_index = 0;
  std::array<double, 4> w_in{};   // z,i,f,o
  std::array<double, 4> w_rec{};  // z,i,f,o
  std::array<double, 4> b{};      // z,i,f,o
  // Source descriptor (parent layer geometry), kept for traceability.
  std::size_t source_n = 0;
  std::size_t source_m = 0;
  int source_layer = 1;
};

// Time-indexed record of a subsystem rollout against one probe signal.
// The input samples live in signal.samples; y[i] and c[i] are the output
// and cell state at t = i+1.
struct ResponseTrace {
  Signal signal;
  Vec y;
  Vec c;

  std::size_t length() const { return y.size(); }
};

// Extracts cell u's weights from the layer. The probe is one-dimensional
// while the layer input has m channels; by default the scalar probe is
// broadcast to every channel, i.e. the effective input weight per gate is
// the row sum over the m input columns. Passing probe_channel >= 0 instead
// drives only that channel (per-channel sensitivity mode).
inline CellSubsystem extract_cell_subsystem(const LstmParams& params, std::size_t u,
                                            int probe_channel = -1) {
  params.validate();
  require(u < params.n, "extract_cell_subsystem: cell index " + std::to_string(u) +
                            " out of range [0, " + std::to_string(params.n) + ")");
  require(probe_channel < static_cast<int>(params.m),
          "extract_cell_subsystem: probe channel " + std::to_string(probe_channel) +
              " out of range [0, " + std::to_string(params.m) + ")");
  CellSubsystem sub;
  sub.cell_index = u;
  sub.source_n = params.n;
  sub.source_m = params.m;
  sub.source_layer = params.layer_index;
  for (std::size_t g = 0; g < 4; ++g) {
    const std::size_t row = params.gate_row(static_cast<Gate>(g), u);
    if (probe_channel >= 0) {
      sub.w_in[g] = params.W(row, static_cast<std::size_t>(probe_channel));
    } else {
      double acc = 0.0;
      for (std::size_t j = 0; j < params.m; ++j) acc += params.W(row, j);
      sub.w_in[g] = acc;
    }
    sub.w_rec[g] = params.W(row, params.m + u);
    sub.b[g] = params.b[row];
  }
  return sub;
}

// Scalar LSTM recurrence from rest (c_0 = 0, y_0 = 0):
//   a_g(t) = w_in[g] x_t + w_rec[g] y_{t-1} + b[g]
// followed by the usual cell update.
inline ResponseTrace subsystem_rollout(const CellSubsystem& sub, const Signal& signal) {
  const std::size_t T = signal.length();
  require(T >= 2, "subsystem_rollout: signal length must be >= 2, got " +
                      std::to_string(T));
  if (!all_finite(signal.samples))
    throw NumericError("subsystem_rollout: non-finite signal sample");
  for (std::size_t g = 0; g < 4; ++g)
    if (!std::isfinite(sub.w_in[g]) || !std::isfinite(sub.w_rec[g]) ||
        !std::isfinite(sub.b[g]))
      throw NumericError("subsystem_rollout: non-finite subsystem weight");

  ResponseTrace trace;
  trace.signal = signal;
  trace.y.resize(T);
  trace.c.resize(T);
  double c = 0.0;
  double y = 0.0;
  for (std::size_t i = 0; i < T; ++i) {
    const double x = signal.samples[i];
    // Accumulation order (bias, input, recurrence) mirrors the full cell, so
    // a subsystem that drops nothing reproduces it bit-for-bit.
    const double az = sub.b[0] + sub.w_in[0] * x + sub.w_rec[0] * y;
    const double ai = sub.b[1] + sub.w_in[1] * x + sub.w_rec[1] * y;
    const double af = sub.b[2] + sub.w_in[2] * x + sub.w_rec[2] * y;
    const double ao = sub.b[3] + sub.w_in[3] * x + sub.w_rec[3] * y;
    c = std::tanh(az) * logistic(ai) + logistic(af) * c;
    y = logistic(ao) * std::tanh(c);
    trace.c[i] = c;
    trace.y[i] = y;
  }
  return trace;
}

}  // namespace lstmscope
