#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>

#include "lstmscope/errors.hpp"
#include "lstmscope/linalg.hpp"

namespace lstmscope {

enum class SignalKind { Step, Sine };

// A probe input sequence. Time is 1-based inside the formulas (t = 1..T);
// storage is 0-indexed with samples[i] holding x at t = i+1.
struct Signal {
  SignalKind kind = SignalKind::Step;
  double amplitude = 1.0;
  double frequency = 0.0;   // cycles/step, sine only
  std::size_t t_step = 0;   // first 1-based instant after the change, step only
  Vec samples;

  std::size_t length() const { return samples.size(); }
};

// x_t = amplitude * [[t > T/2]]. The step instant is t_step = floor(T/2)+1.
inline Signal make_step(std::size_t T, double amplitude) {
  require(T >= 2, "make_step: length must be >= 2, got " + std::to_string(T));
  require(amplitude >= 0.0, "make_step: amplitude must be non-negative");
  Signal s;
  s.kind = SignalKind::Step;
  s.amplitude = amplitude;
  s.t_step = T / 2 + 1;
  s.samples.resize(T);
  for (std::size_t i = 0; i < T; ++i) {
    const std::size_t t = i + 1;
    s.samples[i] = (2 * t > T) ? amplitude : 0.0;
  }
  return s;
}

// x_t = amplitude * sin(2 pi f t), f in cycles/step, 0 < f <= 0.5.
inline Signal make_sine(std::size_t T, double frequency, double amplitude) {
  require(T >= 2, "make_sine: length must be >= 2, got " + std::to_string(T));
  require(frequency > 0.0 && frequency <= 0.5,
          "make_sine: frequency must lie in (0, 0.5] cycles/step (Nyquist), got " +
              std::to_string(frequency));
  require(amplitude >= 0.0, "make_sine: amplitude must be non-negative");
  Signal s;
  s.kind = SignalKind::Sine;
  s.amplitude = amplitude;
  s.frequency = frequency;
  s.samples.resize(T);
  for (std::size_t i = 0; i < T; ++i) {
    const double t = static_cast<double>(i + 1);
    s.samples[i] = amplitude * std::sin(2.0 * std::numbers::pi * frequency * t);
  }
  return s;
}

}  // namespace lstmscope
