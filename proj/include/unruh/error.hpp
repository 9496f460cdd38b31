#pragma once

#include <stdexcept>
#include <string>

namespace unruh {

/// Precondition violations on public entry points (bad dimension, invalid
/// ensemble, shape mismatch).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Base class for numeric guards. The CLI maps these to exit status 3.
class NumericGuard : public std::runtime_error {
 public:
  NumericGuard(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

class OverflowError : public NumericGuard {
 public:
  explicit OverflowError(const std::string& what) : NumericGuard("overflow", what) {}
};

class NonConvergence : public NumericGuard {
 public:
  explicit NonConvergence(const std::string& what)
      : NumericGuard("non_convergence", what) {}
};

class SizeCapExceeded : public NumericGuard {
 public:
  explicit SizeCapExceeded(const std::string& what)
      : NumericGuard("size_cap", what) {}
};

namespace detail {

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw InvalidArgument(msg);
}

}  // namespace detail

}  // namespace unruh
