#include "radi/baselines.hpp"

#include <algorithm>
#include <cmath>

#include "radi/errors.hpp"

namespace radi {

SmoothedTarget smooth_labels(std::span<const std::size_t> labels, std::size_t num_answers, double sigma) {
  if (!(sigma >= 0.0 && sigma < 1.0)) throw ArgumentError("smooth_labels: sigma must lie in [0, 1)");
  if (labels.empty()) throw ArgumentError("smooth_labels: empty label set");
  SmoothedTarget out{DenseVector(num_answers, sigma / static_cast<double>(num_answers)), sigma};
  const double share = (1.0 - sigma) / static_cast<double>(labels.size());
  for (std::size_t a : labels) {
    if (a >= num_answers) throw ArgumentError("smooth_labels: label out of range");
    out.distribution[a] += share;
  }
  return out;
}

LossValue smoothed_cross_entropy(std::span<const double> student_scores, const SmoothedTarget& target) {
  if (target.distribution.size() != student_scores.size()) {
    throw DimensionError("smoothed_cross_entropy: target length mismatch");
  }
  const double lse = log_sum_exp(student_scores);
  LossValue out{0.0, softmax(student_scores)};
  for (std::size_t i = 0; i < student_scores.size(); ++i) {
    const double t = target.distribution[i];
    if (t != 0.0) out.value -= t * (student_scores[i] - lse);
    out.gradient[i] -= t;
  }
  return out;
}

PseudoLabelSet pseudo_labels(const RankedList& teacher, std::span<const std::size_t> revealed, std::size_t k) {
  PseudoLabelSet out{{revealed.begin(), revealed.end()}, k};
  const std::size_t top = std::min(k, teacher.size());
  out.labels.insert(out.labels.end(), teacher.permutation.begin(), teacher.permutation.begin() + top);
  std::sort(out.labels.begin(), out.labels.end());
  out.labels.erase(std::unique(out.labels.begin(), out.labels.end()), out.labels.end());
  return out;
}

LossValue vanilla_kd_loss(std::span<const double> student_scores, std::span<const double> teacher_scores,
                          double temperature) {
  if (!(temperature > 0.0)) throw ArgumentError("vanilla_kd_loss: temperature must be positive");
  if (student_scores.size() != teacher_scores.size()) throw DimensionError("vanilla_kd_loss: length mismatch");
  const std::size_t n = student_scores.size();
  DenseVector s(n), t(n);
  for (std::size_t i = 0; i < n; ++i) {
    s[i] = student_scores[i] / temperature;
    t[i] = teacher_scores[i] / temperature;
  }
  const DenseVector p = softmax(t);
  const DenseVector q = softmax(s);
  const double lse_s = log_sum_exp(s);
  const double lse_t = log_sum_exp(t);
  const double tau2 = temperature * temperature;
  LossValue out{0.0, DenseVector(n)};
  double kl = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (p[i] > 0.0) kl += p[i] * ((t[i] - lse_t) - (s[i] - lse_s));
    out.gradient[i] = temperature * (q[i] - p[i]);
  }
  out.value = tau2 * std::max(kl, 0.0);
  return out;
}

}  // namespace radi
