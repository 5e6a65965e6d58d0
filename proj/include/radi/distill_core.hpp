#ifndef RADI_DISTILL_CORE_HPP_
#define RADI_DISTILL_CORE_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "radi/model.hpp"

namespace radi {

/// A loss value with its exact gradient w.r.t. the raw scores.
struct LossValue {
  double value = 0.0;
  DenseVector gradient;
};

/// Teacher answer order, best first.
struct RankedList {
  std::vector<std::size_t> permutation;
  ScoreVector teacher_scores;

  std::size_t size() const noexcept { return permutation.size(); }
  friend bool operator==(const RankedList&, const RankedList&) = default;
};

/// Mean negative log-softmax probability of the labelled answers.
LossValue classification_loss(std::span<const double> scores, std::span<const std::size_t> labels);

/// Descending stable sort; ties go to the lower answer index.
RankedList teacher_ranking(std::span<const double> teacher_scores);

/// cls + alpha * rank, value and gradient.
LossValue combined_loss(const LossValue& cls, const LossValue& rank, double alpha);

}  // namespace radi

#endif  // RADI_DISTILL_CORE_HPP_
