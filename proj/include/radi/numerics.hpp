#ifndef RADI_NUMERICS_HPP_
#define RADI_NUMERICS_HPP_

#include <cstddef>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

namespace radi {

using DenseVector = std::vector<double>;

/// Row-major dense matrix of doubles.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), values_(rows * cols, fill) {}
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return values_.size(); }

  double& operator()(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {values_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {values_.data() + r * cols_, cols_}; }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }

  /// y = A x
  DenseVector multiply(std::span<const double> x) const;
  /// y = A^T x
  DenseVector multiply_transposed(std::span<const double> x) const;

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

double dot(std::span<const double> a, std::span<const double> b);
double squared_norm(std::span<const double> a);

bool all_finite(std::span<const double> values);
/// Throws DomainError naming `what` when any entry is NaN or infinite.
void require_finite(std::span<const double> values, std::string_view what);

/// Normalised exponentials, computed after subtracting the maximum.
DenseVector softmax(std::span<const double> scores);

/// ln sum_i exp(x_i), computed after subtracting the maximum.
double log_sum_exp(std::span<const double> scores);

using ScalarFunction = std::function<double(std::span<const double>)>;
using GradientFunction = std::function<DenseVector(std::span<const double>)>;

inline constexpr double kDefaultGradientStep = 1e-5;

/// Compares an analytic gradient against central differences.
///
/// Returns max_i |fd_i - g_i| / max(1, |g_i|). Throws DomainError if any
/// evaluation of `f` is non-finite.
double check_gradient(const ScalarFunction& f, const GradientFunction& grad_f,
                      std::span<const double> x, double h = kDefaultGradientStep);

}  // namespace radi

#endif  // RADI_NUMERICS_HPP_
