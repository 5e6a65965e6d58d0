#include "radi/distill_core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "radi/errors.hpp"

namespace radi {

LossValue classification_loss(std::span<const double> scores, std::span<const std::size_t> labels) {
  if (labels.empty()) throw ArgumentError("classification_loss: empty label set");
  for (std::size_t a : labels) {
    if (a >= scores.size()) throw ArgumentError("classification_loss: label " + std::to_string(a) + " out of range");
  }
  const double lse = log_sum_exp(scores);
  const DenseVector prob = softmax(scores);
  const double inv = 1.0 / static_cast<double>(labels.size());
  LossValue out{0.0, prob};
  for (std::size_t a : labels) {
    out.value -= inv * (scores[a] - lse);
    out.gradient[a] -= inv;
  }
  return out;
}

RankedList teacher_ranking(std::span<const double> teacher_scores) {
  require_finite(teacher_scores, "teacher_ranking");
  RankedList out;
  out.teacher_scores.assign(teacher_scores.begin(), teacher_scores.end());
  out.permutation.resize(teacher_scores.size());
  std::iota(out.permutation.begin(), out.permutation.end(), 0);
  std::stable_sort(out.permutation.begin(), out.permutation.end(),
                   [&](std::size_t a, std::size_t b) { return teacher_scores[a] > teacher_scores[b]; });
  return out;
}

LossValue combined_loss(const LossValue& cls, const LossValue& rank, double alpha) {
  if (!(alpha >= 0.0)) throw ArgumentError("combined_loss: alpha must be non-negative");
  if (cls.gradient.size() != rank.gradient.size()) throw DimensionError("combined_loss: gradient length mismatch");
  LossValue out{cls.value + alpha * rank.value, cls.gradient};
  for (std::size_t i = 0; i < out.gradient.size(); ++i) out.gradient[i] += alpha * rank.gradient[i];
  return out;
}

}  // namespace radi
