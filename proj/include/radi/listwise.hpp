#ifndef RADI_LISTWISE_HPP_
#define RADI_LISTWISE_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "radi/distill_core.hpp"

namespace radi {

enum class SamplingScheme { kExp, kZipf, kRandom, kFull };

std::string to_string(SamplingScheme scheme);
SamplingScheme sampling_scheme_from_string(const std::string& name);

/// Hot list = teacher top `hot_size`; cold list = `cold_size` rank-biased
/// draws from the rest.
struct SamplingPlan {
  std::size_t hot_size = 10;
  std::size_t cold_size = 5;
  SamplingScheme scheme = SamplingScheme::kZipf;
  /// Decay of the cold-list sampling weights; must be positive.
  double smoothing = 1.0;
  /// Draw cold answers independently; repeated draws are dropped, so the
  /// cold list may come out shorter than cold_size.
  bool with_replacement = false;
};

/// Hot answers then cold answers, each in teacher-rank order.
struct Sublist {
  std::vector<std::size_t> answer_ids;
  /// 0-based positions of answer_ids in the full teacher ranking.
  std::vector<std::size_t> source_ranks;
  std::size_t hot_count = 0;

  std::size_t size() const noexcept { return answer_ids.size(); }
};

enum class LambdaVariant { kRankNet, kNdcg1, kNdcg2, kNdcg2PlusPlus };

struct LambdaWeighting {
  LambdaVariant variant = LambdaVariant::kRankNet;
  double sigma = 1.0;
  /// Weight of the delta term in NDCG-Loss2++.
  double mu = 5.0;
};

enum class ListwiseLoss { kListMle, kListNet, kStListNet, kLambda };

/// A parsed loss identifier: listmle, listnet, stlistnet, lambda:<variant>.
struct ListwiseLossTag {
  ListwiseLoss loss = ListwiseLoss::kListNet;
  LambdaVariant lambda_variant = LambdaVariant::kRankNet;
};

ListwiseLossTag listwise_loss_from_string(const std::string& tag);
std::string to_string(const ListwiseLossTag& tag);

/// Unnormalised cold-list weight of the 1-based remainder rank `k`:
/// exp(-smoothing * (k - 1)) or k^-smoothing (constant for kRandom). The exp
/// form is shifted by one rank so long lists do not underflow.
double cold_weight(SamplingScheme scheme, double smoothing, std::size_t k);

/// Draws a sublist of `ranking`. Each cold pick consumes one uniform and
/// inverts the cumulative weights of the ranks still available.
Sublist sample_sublist(const RankedList& ranking, const SamplingPlan& plan, Rng& rng);

/// Plackett-Luce negative log-likelihood of the sublist order.
LossValue listmle_loss(std::span<const double> student_scores, const Sublist& sublist);

/// Cross-entropy between teacher and student top-one probabilities, both
/// softmaxed over the sublist only.
LossValue listnet_loss(std::span<const double> student_scores, std::span<const double> teacher_scores,
                       const Sublist& sublist);

/// eps_i = -beta * log(-log u_i), u_i ~ Uniform(0, 1).
DenseVector gumbel_noise(std::size_t count, double beta, Rng& rng);

/// ListNet against teacher scores perturbed by gumbel_noise(beta).
LossValue stlistnet_loss(std::span<const double> student_scores, std::span<const double> teacher_scores,
                         const Sublist& sublist, double beta, Rng& rng);

/// sum over teacher-ordered pairs of w_ij * log2(1 + exp(-sigma (s_i - s_j))).
///
/// Relevance follows teacher position p (1-based) in the sublist:
/// rel = max(0, n - p). Gains G = (2^rel - 1) / maxDCG; the discount
/// D(r) = log2(1 + r) uses the student's current rank r inside the sublist,
/// held constant for differentiation.
LossValue lambda_loss(std::span<const double> student_scores, std::span<const double> teacher_scores,
                      const Sublist& sublist, const LambdaWeighting& weighting);

struct ListwiseOptions {
  SamplingPlan plan;
  ListwiseLossTag tag;
  double beta = 1.0;
  LambdaWeighting weighting;
};

/// Samples a fresh sublist and evaluates the selected loss. Gradients are
/// full length, zero outside the sublist.
LossValue listwise_rank_loss(std::span<const double> student_scores, const RankedList& ranking,
                             const ListwiseOptions& options, Rng& rng);

}  // namespace radi

#endif  // RADI_LISTWISE_HPP_
