#pragma once

#include <stdexcept>
#include <string>

namespace rgbuv {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input violates a documented precondition (shape, range, parameter).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// The histogram normalizer vanished; only an all-black image can do this.
class DegenerateImage : public Error {
 public:
  DegenerateImage() : Error("degenerate image: zero total intensity") {}
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Optimization produced a non-finite loss.
class NumericalFailure : public Error {
 public:
  NumericalFailure(const std::string& what, int iteration)
      : Error(what + " (iteration " + std::to_string(iteration) + ")"), iteration_(iteration) {}

  [[nodiscard]] int iteration() const noexcept { return iteration_; }

 private:
  int iteration_;
};

}  // namespace rgbuv
