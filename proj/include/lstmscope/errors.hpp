#pragma once

#include <stdexcept>
#include <string>

namespace lstmscope {

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed inputs: bad shapes, bad files, out-of-range arguments.
// The CLI maps these to exit code 2.
class InputError : public Error {
 public:
  explicit InputError(const std::string& what) : Error(what) {}
};

// Numerical failures: non-finite values, training divergence.
// The CLI maps these to exit code 3.
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error(what) {}
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw InputError(msg);
}

}  // namespace lstmscope
