#pragma once

#include <stdexcept>
#include <string>

namespace foi {

// Bad data coming from outside the process: malformed files, wrong dims,
// out-of-order frames. The CLI maps these to exit code 1.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller broke a documented precondition. The CLI maps these to exit code 2.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class DimensionMismatch : public ContractViolation {
 public:
  DimensionMismatch(std::size_t expected, std::size_t actual)
      : ContractViolation("dimension mismatch: expected " + std::to_string(expected) +
                          ", got " + std::to_string(actual)),
        expected_(expected),
        actual_(actual) {}

  std::size_t expected() const noexcept { return expected_; }
  std::size_t actual() const noexcept { return actual_; }

 private:
  std::size_t expected_;
  std::size_t actual_;
};

// A zero embedding almost always means the extractor upstream failed.
class ZeroNormError : public InputError {
 public:
  ZeroNormError() : InputError("embedding has zero norm") {}
};

}  // namespace foi
