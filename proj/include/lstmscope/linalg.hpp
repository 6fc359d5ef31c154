#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "lstmscope/errors.hpp"

namespace lstmscope {

using Vec = std::vector<double>;

// Dense row-major matrix of doubles. Plain loops throughout; trajectories
// must stay bit-reproducible across runs.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  Vec data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  std::size_t size() const { return data.size(); }

  bool operator==(const Matrix& other) const = default;
};

inline bool all_finite(const Vec& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

inline bool all_finite(const Matrix& m) { return all_finite(m.data); }

// Stable branch form: no overflow for any argument magnitude.
inline double logistic(double a) {
  if (a >= 0.0) return 1.0 / (1.0 + std::exp(-a));
  const double e = std::exp(a);
  return e / (1.0 + e);
}

inline Vec matvec(const Matrix& A, const Vec& x) {
  require(A.cols == x.size(),
          "matvec: shape mismatch: matrix is " + std::to_string(A.rows) + "x" +
              std::to_string(A.cols) + ", vector has length " +
              std::to_string(x.size()));
  Vec out(A.rows, 0.0);
  for (std::size_t i = 0; i < A.rows; ++i) {
    double acc = 0.0;
    const double* row = A.data.data() + i * A.cols;
    for (std::size_t j = 0; j < A.cols; ++j) acc += row[j] * x[j];
    out[i] = acc;
  }
  return out;
}

inline double mean(const Vec& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

}  // namespace lstmscope
