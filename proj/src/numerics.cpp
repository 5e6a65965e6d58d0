#include "radi/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "radi/errors.hpp"

namespace radi {

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows_ * cols_) {
    throw DimensionError("DenseMatrix: " + std::to_string(values_.size()) +
                         " values for a " + std::to_string(rows_) + "x" +
                         std::to_string(cols_) + " matrix");
  }
}

DenseVector DenseMatrix::multiply(std::span<const double> x) const {
  if (x.size() != cols_) throw DimensionError("DenseMatrix::multiply: length mismatch");
  DenseVector y(rows_, 0.0);
  for (std::size_t r = 0; r < rows_; ++r) y[r] = dot(row(r), x);
  return y;
}

DenseVector DenseMatrix::multiply_transposed(std::span<const double> x) const {
  if (x.size() != rows_) throw DimensionError("DenseMatrix::multiply_transposed: length mismatch");
  DenseVector y(cols_, 0.0);
  for (std::size_t r = 0; r < rows_; ++r) {
    const double xr = x[r];
    if (xr == 0.0) continue;
    auto a = row(r);
    for (std::size_t c = 0; c < cols_; ++c) y[c] += a[c] * xr;
  }
  return y;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double squared_norm(std::span<const double> a) { return dot(a, a); }

bool all_finite(std::span<const double> values) {
  return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

void require_finite(std::span<const double> values, std::string_view what) {
  if (!all_finite(values)) throw DomainError(std::string(what) + ": non-finite input");
}

DenseVector softmax(std::span<const double> scores) {
  if (scores.empty()) throw DimensionError("softmax: empty input");
  require_finite(scores, "softmax");
  const double top = *std::max_element(scores.begin(), scores.end());
  DenseVector out(scores.size());
  double total = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    out[i] = std::exp(scores[i] - top);
    total += out[i];
  }
  for (double& v : out) v /= total;
  return out;
}

double log_sum_exp(std::span<const double> scores) {
  if (scores.empty()) throw DimensionError("log_sum_exp: empty input");
  require_finite(scores, "log_sum_exp");
  const double top = *std::max_element(scores.begin(), scores.end());
  double total = 0.0;
  for (double s : scores) total += std::exp(s - top);
  return top + std::log(total);
}

double check_gradient(const ScalarFunction& f, const GradientFunction& grad_f,
                      std::span<const double> x, double h) {
  if (!(h > 0.0)) throw ArgumentError("check_gradient: step must be positive");
  const DenseVector analytic = grad_f(x);
  if (analytic.size() != x.size()) throw DimensionError("check_gradient: gradient length mismatch");
  DenseVector probe(x.begin(), x.end());
  double worst = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + h;
    const double up = f(probe);
    probe[i] = x[i] - h;
    const double down = f(probe);
    probe[i] = x[i];
    if (!std::isfinite(up) || !std::isfinite(down)) {
      throw DomainError("check_gradient: non-finite function value at coordinate " +
                        std::to_string(i));
    }
    const double numeric = (up - down) / (2.0 * h);
    const double err = std::abs(numeric - analytic[i]) / std::max(1.0, std::abs(analytic[i]));
    worst = std::max(worst, err);
  }
  return worst;
}

}  // namespace radi
