#ifndef RADI_PAIRWISE_HPP_
#define RADI_PAIRWISE_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "radi/distill_core.hpp"

namespace radi {

/// Variance of MC-dropout pairwise score differences over the K retained
/// answers. matrix(i, j) refers to answer_ids[i] vs answer_ids[j].
struct UncertaintyMatrix {
  DenseMatrix matrix;
  std::vector<std::size_t> answer_ids;
};

/// Transport plan over the retained answers. Before rescaling, every row and
/// column sums to 1/K and the diagonal is zero.
struct MarginScalingMatrix {
  DenseMatrix matrix;
  std::vector<std::size_t> answer_ids;
  bool rescaled = false;
  std::size_t iterations = 0;
  double residual = 0.0;
};

/// Per-pair hinge margins, indexed like the scaling matrix they came from.
struct SoftMarginSet {
  DenseMatrix margins;
  std::vector<std::size_t> answer_ids;
  double base_margin = 1.0;

  friend bool operator==(const SoftMarginSet&, const SoftMarginSet&) = default;
};

inline constexpr double kSinkhornTolerance = 1e-8;
inline constexpr std::size_t kSinkhornMaxIterations = 10000;

/// Keeps the `truncate_to` answers with the highest mean MC score (ties by
/// index) and returns U = (1/T) sum_k (D^k - mean D)^2 with
/// D^k_ij = p^k_i - p^k_j. Requires at least two passes.
UncertaintyMatrix pairwise_uncertainty(std::span<const ScoreVector> mc_scores, std::size_t truncate_to);

/// `scale` x median off-diagonal uncertainty; `scale` when that median is zero.
double default_sinkhorn_lambda(const UncertaintyMatrix& uncertainty, double scale = 1.0);

/// Entropic transport plan with uniform marginals 1/K over the kernel
/// exp(-U / lambda) with self-pairs removed. Alternates u = a / (K v) and
/// v = b / (K^T u) until mean |v_t - v_{t-1}| <= tol; returns diag(u) K diag(v).
/// Throws ConvergenceError (carrying the last residual) after max_iters.
MarginScalingMatrix sinkhorn_margins(const UncertaintyMatrix& uncertainty, double lambda,
                                     double tol = kSinkhornTolerance,
                                     std::size_t max_iters = kSinkhornMaxIterations);

/// The plan with every off-diagonal entry equal to 1/(K(K-1)).
MarginScalingMatrix uniform_margins(std::span<const std::size_t> answer_ids);

/// Off-diagonal weights drawn from Uniform[0, 1], normalised to total mass 1.
MarginScalingMatrix random_margins(std::span<const std::size_t> answer_ids, Rng& rng);

/// Off-diagonal weights 1 / U_ij (floored), normalised to total mass 1.
MarginScalingMatrix inverse_uncertainty_margins(const UncertaintyMatrix& uncertainty);

/// margins = m * W, times K(K-1) when `rescale` so the mean off-diagonal
/// margin is m.
SoftMarginSet soft_margins(const MarginScalingMatrix& scaling, double base_margin, bool rescale);

/// Mean hinge max(0, M_ij - (s_i - s_j)) over the retained pairs the teacher
/// orders strictly (t_i > t_j). Zero subgradient at the kink.
LossValue pairwise_margin_loss(std::span<const double> student_scores, const RankedList& teacher,
                               const SoftMarginSet& margins);

/// Same loss with one hard margin shared by every pair among `answer_ids`.
LossValue pairwise_margin_loss(std::span<const double> student_scores, const RankedList& teacher,
                               std::span<const std::size_t> answer_ids, double hard_margin);

}  // namespace radi

#endif  // RADI_PAIRWISE_HPP_
