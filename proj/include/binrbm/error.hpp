#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace binrbm {

// Error families. The CLI maps each family to one exit code (see tools/cli.hpp).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Precondition or invariant violated by caller-supplied values.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Input that is well-formed but has no meaningful result (e.g. a zero-norm row).
class DegenerateInputError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Exact enumeration refused because the state space is too large.
class SizeLimitError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Malformed cell in a data file. Row is the 1-based file line (header = line 1).
class ParseError : public ValidationError {
 public:
  ParseError(std::size_t row, std::string column, const std::string& what)
      : ValidationError(what), row_(row), column_(std::move(column)) {}

  std::size_t row() const noexcept { return row_; }
  const std::string& column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::string column_;
};

class MissingColumnError : public ValidationError {
 public:
  explicit MissingColumnError(std::string column)
      : ValidationError("missing column '" + column + "'"), column_(std::move(column)) {}

  const std::string& column() const noexcept { return column_; }

 private:
  std::string column_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// An iterative procedure failed to reach its tolerance, or produced non-finite values.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, std::vector<double> last_iterate = {})
      : Error(what), last_iterate_(std::move(last_iterate)) {}

  const std::vector<double>& last_iterate() const noexcept { return last_iterate_; }

 private:
  std::vector<double> last_iterate_;
};

namespace detail {

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ValidationError(message);
}

}  // namespace detail
}  // namespace binrbm
