#ifndef RADI_METRICS_HPP_
#define RADI_METRICS_HPP_

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "radi/model.hpp"
#include "radi/synthdata.hpp"

namespace radi {

inline constexpr std::size_t kDefaultEvalK = 5;

struct EvalResult {
  double acc_at_1 = 0.0;
  double hit_at_k = 0.0;
  double ndcg_at_k = 0.0;
  std::size_t k = kDefaultEvalK;
  std::size_t num_instances = 0;
  /// Instances with all-zero relevance, left out of the nDCG mean.
  std::size_t ndcg_excluded = 0;
};

/// Indices of the `k` highest scores, best first; ties go to the lower index.
std::vector<std::size_t> top_k(std::span<const double> scores, std::size_t k);

/// 1 iff the arg-max (lowest index on ties) is a positive.
int acc_at_1(std::span<const double> scores, std::span<const std::size_t> positives);

/// 1 iff the top k intersects the positives.
int hit_at_k(std::span<const double> scores, std::span<const std::size_t> positives, std::size_t k);

/// Exponential-gain nDCG@k; nullopt when every relevance is zero.
std::optional<double> ndcg_at_k(std::span<const double> scores, std::span<const double> relevance, std::size_t k);

/// Dataset means with dropout off. `graded` uses annotation counts as
/// relevance for nDCG.
EvalResult evaluate(const ScoreModel& model, const Dataset& dataset, std::size_t k = kDefaultEvalK,
                    bool graded = false);

/// Mean over instances with hidden positives of the fraction of hidden
/// positives (full minus revealed) that land in the model's top k.
double hidden_positive_recovery(const ScoreModel& model, const Dataset& dataset, std::size_t k);

}  // namespace radi

#endif  // RADI_METRICS_HPP_
