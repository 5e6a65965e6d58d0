#ifndef RADI_BASELINES_HPP_
#define RADI_BASELINES_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "radi/distill_core.hpp"

namespace radi {

struct SmoothedTarget {
  DenseVector distribution;
  double amount = 0.0;
};

struct PseudoLabelSet {
  std::vector<std::size_t> labels;  // sorted
  std::size_t k = 0;
};

/// (1 - sigma) * uniform over `labels` + sigma / N on every class.
SmoothedTarget smooth_labels(std::span<const std::size_t> labels, std::size_t num_answers, double sigma);

/// -sum_i target_i log softmax(scores)_i
LossValue smoothed_cross_entropy(std::span<const double> student_scores, const SmoothedTarget& target);

/// revealed labels united with the teacher's top-k answers.
PseudoLabelSet pseudo_labels(const RankedList& teacher, std::span<const std::size_t> revealed, std::size_t k);

/// tau^2 * KL(softmax(teacher / tau) || softmax(student / tau)).
LossValue vanilla_kd_loss(std::span<const double> student_scores, std::span<const double> teacher_scores,
                          double temperature);

}  // namespace radi

#endif  // RADI_BASELINES_HPP_
