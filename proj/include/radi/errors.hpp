#ifndef RADI_ERRORS_HPP_
#define RADI_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace radi {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shapes or lengths that do not compose.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values or values outside the mathematical domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Invalid argument or violated precondition.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Input for which the requested quantity is undefined (e.g. no ordered pairs).
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

/// Iterative solver ran out of iterations.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// Non-finite loss or gradient during optimisation.
class TrainingError : public Error {
 public:
  using Error::Error;
};

}  // namespace radi

#endif  // RADI_ERRORS_HPP_
