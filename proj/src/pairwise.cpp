#include "radi/pairwise.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "radi/errors.hpp"

namespace radi {
namespace {

MarginScalingMatrix normalised_plan(DenseMatrix weights, std::span<const std::size_t> answer_ids) {
  const std::size_t k = weights.rows();
  double total = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    weights(i, i) = 0.0;
    for (std::size_t j = 0; j < k; ++j) total += weights(i, j);
  }
  if (!(total > 0.0)) throw DegenerateInputError("margin plan has zero mass");
  for (double& w : weights.values()) w /= total;
  return {std::move(weights), {answer_ids.begin(), answer_ids.end()}, false, 0, 0.0};
}

LossValue hinge_over_pairs(std::span<const double> student_scores, const RankedList& teacher,
                           std::span<const std::size_t> ids, const DenseMatrix* margins,
                           double hard_margin) {
  const std::size_t n = student_scores.size();
  if (teacher.teacher_scores.size() != n) throw DimensionError("pairwise_margin_loss: teacher/student length mismatch");
  for (std::size_t id : ids) {
    if (id >= n) throw DimensionError("pairwise_margin_loss: answer id out of range");
  }
  const auto& t = teacher.teacher_scores;
  LossValue out{0.0, DenseVector(n, 0.0)};
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    for (std::size_t j = 0; j < ids.size(); ++j) {
      const std::size_t a = ids[i], b = ids[j];
      if (!(t[a] > t[b])) continue;
      ++pairs;
      const double margin = margins ? (*margins)(i, j) : hard_margin;
      const double slack = margin - (student_scores[a] - student_scores[b]);
      if (slack > 0.0) {
        out.value += slack;
        out.gradient[a] -= 1.0;
        out.gradient[b] += 1.0;
      }
    }
  }
  if (pairs == 0) throw DegenerateInputError("pairwise_margin_loss: teacher scores are all tied");
  const double inv = 1.0 / static_cast<double>(pairs);
  out.value *= inv;
  for (double& g : out.gradient) g *= inv;
  return out;
}

}  // namespace

UncertaintyMatrix pairwise_uncertainty(std::span<const ScoreVector> mc_scores, std::size_t truncate_to) {
  const std::size_t passes = mc_scores.size();
  if (passes < 2) throw ArgumentError("pairwise_uncertainty: at least two MC passes required");
  const std::size_t n = mc_scores.front().size();
  for (const auto& s : mc_scores) {
    if (s.size() != n) throw DimensionError("pairwise_uncertainty: ragged MC stack");
  }
  if (truncate_to == 0 || truncate_to > n) throw ArgumentError("pairwise_uncertainty: truncation must lie in [1, N]");

  DenseVector mean(n, 0.0);
  for (const auto& s : mc_scores) {
    for (std::size_t a = 0; a < n; ++a) mean[a] += s[a];
  }
  for (double& m : mean) m /= static_cast<double>(passes);
  const RankedList by_mean = teacher_ranking(mean);

  UncertaintyMatrix out;
  out.answer_ids.assign(by_mean.permutation.begin(), by_mean.permutation.begin() + truncate_to);
  const std::size_t k = truncate_to;
  out.matrix = DenseMatrix(k, k);
  DenseVector diff(passes);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      const std::size_t a = out.answer_ids[i], b = out.answer_ids[j];
      // shifted by the first pass so identical passes give exactly zero
      const double anchor = mc_scores[0][a] - mc_scores[0][b];
      double avg = 0.0;
      for (std::size_t p = 0; p < passes; ++p) {
        diff[p] = (mc_scores[p][a] - mc_scores[p][b]) - anchor;
        avg += diff[p];
      }
      avg /= static_cast<double>(passes);
      double var = 0.0;
      for (double d : diff) var += (d - avg) * (d - avg);
      var /= static_cast<double>(passes);
      out.matrix(i, j) = var;
      out.matrix(j, i) = var;
    }
  }
  return out;
}

double default_sinkhorn_lambda(const UncertaintyMatrix& uncertainty, double scale) {
  if (!(scale > 0.0)) throw ArgumentError("default_sinkhorn_lambda: scale must be positive");
  const std::size_t k = uncertainty.matrix.rows();
  std::vector<double> off;
  off.reserve(k * (k > 0 ? k - 1 : 0));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      if (i != j) off.push_back(uncertainty.matrix(i, j));
    }
  }
  if (off.empty()) return scale;
  const std::size_t mid = off.size() / 2;
  std::nth_element(off.begin(), off.begin() + mid, off.end());
  double median = off[mid];
  if (off.size() % 2 == 0) {
    median = 0.5 * (median + *std::max_element(off.begin(), off.begin() + mid));
  }
  return median > 0.0 ? scale * median : scale;
}

MarginScalingMatrix sinkhorn_margins(const UncertaintyMatrix& uncertainty, double lambda, double tol,
                                     std::size_t max_iters) {
  const std::size_t k = uncertainty.matrix.rows();
  if (uncertainty.matrix.cols() != k) throw DimensionError("sinkhorn_margins: uncertainty must be square");
  if (k < 2) throw ArgumentError("sinkhorn_margins: at least two answers required");
  if (!(lambda > 0.0)) throw ArgumentError("sinkhorn_margins: lambda must be positive");
  require_finite(uncertainty.matrix.values(), "sinkhorn_margins");

  DenseMatrix kernel(k, k);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      kernel(i, j) = (i == j) ? 0.0 : std::exp(-uncertainty.matrix(i, j) / lambda);
    }
  }

  const double target = 1.0 / static_cast<double>(k);
  DenseVector u(k, target);
  DenseVector v(k, 1.0);
  double residual = 1e8;
  std::size_t iter = 0;
  while (residual > tol) {
    if (iter == max_iters) {
      throw ConvergenceError("sinkhorn_margins: no convergence after " + std::to_string(max_iters) +
                                 " iterations (residual " + std::to_string(residual) + ")",
                             residual);
    }
    ++iter;
    const DenseVector kv = kernel.multiply(v);
    for (std::size_t i = 0; i < k; ++i) u[i] = target / kv[i];
    const DenseVector ktu = kernel.multiply_transposed(u);
    residual = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      const double next = target / ktu[j];
      residual += std::abs(next - v[j]);
      v[j] = next;
    }
    residual /= static_cast<double>(k);
    if (!std::isfinite(residual) || !all_finite(u)) {
      throw ConvergenceError("sinkhorn_margins: scaling vectors overflowed (kernel underflow)",
                             std::numeric_limits<double>::infinity());
    }
  }

  MarginScalingMatrix out;
  out.matrix = DenseMatrix(k, k);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) out.matrix(i, j) = u[i] * kernel(i, j) * v[j];
  }
  out.answer_ids = uncertainty.answer_ids;
  out.iterations = iter;
  out.residual = residual;
  return out;
}

MarginScalingMatrix uniform_margins(std::span<const std::size_t> answer_ids) {
  const std::size_t k = answer_ids.size();
  if (k < 2) throw ArgumentError("uniform_margins: at least two answers required");
  return normalised_plan(DenseMatrix(k, k, 1.0), answer_ids);
}

MarginScalingMatrix random_margins(std::span<const std::size_t> answer_ids, Rng& rng) {
  const std::size_t k = answer_ids.size();
  if (k < 2) throw ArgumentError("random_margins: at least two answers required");
  DenseMatrix w(k, k);
  for (double& x : w.values()) x = rng.uniform_open();
  return normalised_plan(std::move(w), answer_ids);
}

MarginScalingMatrix inverse_uncertainty_margins(const UncertaintyMatrix& uncertainty) {
  const std::size_t k = uncertainty.matrix.rows();
  if (k < 2) throw ArgumentError("inverse_uncertainty_margins: at least two answers required");
  DenseMatrix w(k, k);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) w(i, j) = 1.0 / std::max(uncertainty.matrix(i, j), 1e-12);
  }
  return normalised_plan(std::move(w), uncertainty.answer_ids);
}

SoftMarginSet soft_margins(const MarginScalingMatrix& scaling, double base_margin, bool rescale) {
  if (!(base_margin > 0.0)) throw ArgumentError("soft_margins: base margin must be positive");
  const std::size_t k = scaling.matrix.rows();
  const double factor = base_margin * (rescale ? static_cast<double>(k * (k - 1)) : 1.0);
  SoftMarginSet out{scaling.matrix, scaling.answer_ids, base_margin};
  for (double& m : out.margins.values()) m *= factor;
  return out;
}

LossValue pairwise_margin_loss(std::span<const double> student_scores, const RankedList& teacher,
                               const SoftMarginSet& margins) {
  if (margins.margins.rows() != margins.answer_ids.size() || margins.margins.cols() != margins.answer_ids.size()) {
    throw DimensionError("pairwise_margin_loss: margin matrix does not match its answer set");
  }
  return hinge_over_pairs(student_scores, teacher, margins.answer_ids, &margins.margins, 0.0);
}

LossValue pairwise_margin_loss(std::span<const double> student_scores, const RankedList& teacher,
                               std::span<const std::size_t> answer_ids, double hard_margin) {
  if (!(hard_margin > 0.0)) throw ArgumentError("pairwise_margin_loss: margin must be positive");
  return hinge_over_pairs(student_scores, teacher, answer_ids, nullptr, hard_margin);
}

}  // namespace radi
