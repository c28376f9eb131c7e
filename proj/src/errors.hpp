#pragma once

#include <stdexcept>
#include <string>

namespace ginn {

// Bad or inconsistent input data (malformed files, misaligned series).
// Distinct from std::invalid_argument, which we reserve for caller mistakes
// such as out-of-range options. The CLI maps the three buckets to exit codes
// 1 (argument), 2 (data), 3 (numeric).
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failure: non-finite likelihood or loss, invalid variance path,
// optimizer breakdown.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ginn
