#include "radi/listwise.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "radi/errors.hpp"

namespace radi {

std::string to_string(SamplingScheme scheme) {
  switch (scheme) {
    case SamplingScheme::kExp: return "exp";
    case SamplingScheme::kZipf: return "zipf";
    case SamplingScheme::kRandom: return "random";
    case SamplingScheme::kFull: return "full";
  }
  return "full";
}

SamplingScheme sampling_scheme_from_string(const std::string& name) {
  if (name == "exp") return SamplingScheme::kExp;
  if (name == "zipf") return SamplingScheme::kZipf;
  if (name == "random") return SamplingScheme::kRandom;
  if (name == "full") return SamplingScheme::kFull;
  throw ArgumentError("unknown sampling scheme '" + name + "'");
}

ListwiseLossTag listwise_loss_from_string(const std::string& tag) {
  if (tag == "listmle") return {ListwiseLoss::kListMle};
  if (tag == "listnet") return {ListwiseLoss::kListNet};
  if (tag == "stlistnet") return {ListwiseLoss::kStListNet};
  if (tag == "lambda:ranknet") return {ListwiseLoss::kLambda, LambdaVariant::kRankNet};
  if (tag == "lambda:ndcg1") return {ListwiseLoss::kLambda, LambdaVariant::kNdcg1};
  if (tag == "lambda:ndcg2") return {ListwiseLoss::kLambda, LambdaVariant::kNdcg2};
  if (tag == "lambda:ndcg2pp") return {ListwiseLoss::kLambda, LambdaVariant::kNdcg2PlusPlus};
  throw ArgumentError("unknown listwise loss '" + tag + "'");
}

std::string to_string(const ListwiseLossTag& tag) {
  switch (tag.loss) {
    case ListwiseLoss::kListMle: return "listmle";
    case ListwiseLoss::kListNet: return "listnet";
    case ListwiseLoss::kStListNet: return "stlistnet";
    case ListwiseLoss::kLambda: break;
  }
  switch (tag.lambda_variant) {
    case LambdaVariant::kRankNet: return "lambda:ranknet";
    case LambdaVariant::kNdcg1: return "lambda:ndcg1";
    case LambdaVariant::kNdcg2: return "lambda:ndcg2";
    case LambdaVariant::kNdcg2PlusPlus: return "lambda:ndcg2pp";
  }
  return "lambda:ranknet";
}

double cold_weight(SamplingScheme scheme, double smoothing, std::size_t k) {
  const double rank = static_cast<double>(k);
  switch (scheme) {
    case SamplingScheme::kExp: return std::exp(-smoothing * (rank - 1.0));
    case SamplingScheme::kZipf: return std::pow(rank, -smoothing);
    default: return 1.0;
  }
}

Sublist sample_sublist(const RankedList& ranking, const SamplingPlan& plan, Rng& rng) {
  const std::size_t n = ranking.size();
  Sublist out;
  if (plan.scheme == SamplingScheme::kFull) {
    out.answer_ids = ranking.permutation;
    out.source_ranks.resize(n);
    std::iota(out.source_ranks.begin(), out.source_ranks.end(), 0);
    out.hot_count = n;
    return out;
  }
  if (plan.hot_size + plan.cold_size > n) throw ArgumentError("sample_sublist: hot + cold exceeds the ranking length");
  if (plan.hot_size + plan.cold_size == 0) throw ArgumentError("sample_sublist: empty plan");
  if (!(plan.smoothing > 0.0)) throw ArgumentError("sample_sublist: smoothing must be positive");

  for (std::size_t r = 0; r < plan.hot_size; ++r) out.source_ranks.push_back(r);
  out.hot_count = plan.hot_size;

  const std::size_t remainder = n - plan.hot_size;
  std::vector<double> weights(remainder);
  for (std::size_t k = 0; k < remainder; ++k) weights[k] = cold_weight(plan.scheme, plan.smoothing, k + 1);
  std::vector<bool> taken(remainder, false);
  std::vector<std::size_t> cold;
  for (std::size_t draw = 0; draw < plan.cold_size; ++draw) {
    double total = 0.0;
    for (std::size_t k = 0; k < remainder; ++k) {
      if (plan.with_replacement || !taken[k]) total += weights[k];
    }
    const double target = rng.uniform() * total;
    double acc = 0.0;
    std::size_t pick = remainder;
    std::size_t last_available = remainder;
    for (std::size_t k = 0; k < remainder; ++k) {
      if (!plan.with_replacement && taken[k]) continue;
      last_available = k;
      acc += weights[k];
      if (target < acc) {
        pick = k;
        break;
      }
    }
    if (pick == remainder) pick = last_available;  // rounding at the upper end
    if (taken[pick]) continue;
    taken[pick] = true;
    cold.push_back(pick);
  }
  std::sort(cold.begin(), cold.end());
  for (std::size_t k : cold) out.source_ranks.push_back(plan.hot_size + k);
  for (std::size_t r : out.source_ranks) out.answer_ids.push_back(ranking.permutation[r]);
  return out;
}

namespace {

void check_sublist(const Sublist& sublist, std::size_t n, const char* who) {
  if (sublist.answer_ids.empty()) throw ArgumentError(std::string(who) + ": empty sublist");
  for (std::size_t a : sublist.answer_ids) {
    if (a >= n) throw DimensionError(std::string(who) + ": answer id out of range");
  }
}

DenseVector gather(std::span<const double> scores, const Sublist& sublist) {
  DenseVector out(sublist.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = scores[sublist.answer_ids[i]];
  return out;
}

// log2(1 + exp(-z)) and its derivative in z
double log2_logistic_loss(double z) {
  const double softplus = std::max(-z, 0.0) + std::log1p(std::exp(-std::abs(z)));
  return softplus / std::numbers::ln2;
}

double log2_logistic_slope(double z) {
  // d/dz log2(1 + e^-z) = -sigmoid(-z) / ln 2
  const double s = z >= 0 ? std::exp(-z) / (1.0 + std::exp(-z)) : 1.0 / (1.0 + std::exp(z));
  return -s / std::numbers::ln2;
}

LossValue cross_entropy_on_sublist(std::span<const double> student_scores, const DenseVector& target_logits,
                                   const Sublist& sublist) {
  const DenseVector student = gather(student_scores, sublist);
  const DenseVector p_teacher = softmax(target_logits);
  const DenseVector p_student = softmax(student);
  const double lse = log_sum_exp(student);
  LossValue out{0.0, DenseVector(student_scores.size(), 0.0)};
  for (std::size_t i = 0; i < student.size(); ++i) {
    out.value -= p_teacher[i] * (student[i] - lse);
    out.gradient[sublist.answer_ids[i]] += p_student[i] - p_teacher[i];
  }
  return out;
}

}  // namespace

LossValue listmle_loss(std::span<const double> student_scores, const Sublist& sublist) {
  check_sublist(sublist, student_scores.size(), "listmle_loss");
  const DenseVector s = gather(student_scores, sublist);
  const std::size_t n = s.size();
  // suffix[i] = log sum_{k >= i} exp(s_k)
  DenseVector suffix(n);
  for (std::size_t i = n; i-- > 0;) {
    suffix[i] = (i + 1 == n) ? s[i] : std::max(s[i], suffix[i + 1]) +
                                          std::log1p(std::exp(-std::abs(s[i] - suffix[i + 1])));
  }
  LossValue out{0.0, DenseVector(student_scores.size(), 0.0)};
  for (std::size_t i = 0; i < n; ++i) out.value += suffix[i] - s[i];
  for (std::size_t m = 0; m < n; ++m) {
    double g = -1.0;
    for (std::size_t i = 0; i <= m; ++i) g += std::exp(s[m] - suffix[i]);
    out.gradient[sublist.answer_ids[m]] += g;
  }
  return out;
}

LossValue listnet_loss(std::span<const double> student_scores, std::span<const double> teacher_scores,
                       const Sublist& sublist) {
  check_sublist(sublist, student_scores.size(), "listnet_loss");
  if (teacher_scores.size() != student_scores.size()) throw DimensionError("listnet_loss: teacher/student length mismatch");
  return cross_entropy_on_sublist(student_scores, gather(teacher_scores, sublist), sublist);
}

DenseVector gumbel_noise(std::size_t count, double beta, Rng& rng) {
  if (!(beta >= 0.0)) throw ArgumentError("gumbel_noise: beta must be non-negative");
  DenseVector eps(count);
  for (double& e : eps) e = -beta * std::log(-std::log(rng.uniform_open()));
  return eps;
}

LossValue stlistnet_loss(std::span<const double> student_scores, std::span<const double> teacher_scores,
                         const Sublist& sublist, double beta, Rng& rng) {
  check_sublist(sublist, student_scores.size(), "stlistnet_loss");
  if (teacher_scores.size() != student_scores.size()) throw DimensionError("stlistnet_loss: teacher/student length mismatch");
  DenseVector perturbed = gather(teacher_scores, sublist);
  const DenseVector eps = gumbel_noise(perturbed.size(), beta, rng);
  for (std::size_t i = 0; i < perturbed.size(); ++i) perturbed[i] += eps[i];
  return cross_entropy_on_sublist(student_scores, perturbed, sublist);
}

LossValue lambda_loss(std::span<const double> student_scores, std::span<const double> teacher_scores,
                      const Sublist& sublist, const LambdaWeighting& weighting) {
  check_sublist(sublist, student_scores.size(), "lambda_loss");
  if (sublist.size() < 2) throw ArgumentError("lambda_loss: sublist needs at least two answers");
  if (!(weighting.sigma > 0.0)) throw ArgumentError("lambda_loss: sigma must be positive");
  (void)teacher_scores;  // the target order is the sublist order
  const DenseVector s = gather(student_scores, sublist);
  const std::size_t n = s.size();

  auto discount = [](double r) { return std::log2(1.0 + r); };
  DenseVector gain(n);
  double max_dcg = 0.0;
  for (std::size_t p = 0; p < n; ++p) {
    const double rel = static_cast<double>(n - (p + 1));
    gain[p] = std::exp2(rel) - 1.0;
    max_dcg += gain[p] / discount(static_cast<double>(p + 1));
  }
  for (double& g : gain) g /= max_dcg;

  // student rank (1-based) of every sublist position; ties keep sublist order
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return s[a] > s[b]; });
  std::vector<double> rank(n);
  for (std::size_t r = 0; r < n; ++r) rank[order[r]] = static_cast<double>(r + 1);

  LossValue out{0.0, DenseVector(student_scores.size(), 0.0)};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double w = 1.0;
      const double distance = std::abs(rank[i] - rank[j]);
      const double delta = std::abs(1.0 / discount(distance) - 1.0 / discount(distance + 1.0));
      switch (weighting.variant) {
        case LambdaVariant::kRankNet: break;
        case LambdaVariant::kNdcg1: w = gain[i] / discount(rank[i]); break;
        case LambdaVariant::kNdcg2: w = std::abs(gain[i] - gain[j]) * delta; break;
        case LambdaVariant::kNdcg2PlusPlus: {
          const double rho = std::abs(1.0 / discount(rank[i]) - 1.0 / discount(rank[j]));
          w = std::abs(gain[i] - gain[j]) * (rho + weighting.mu * delta);
          break;
        }
      }
      const double z = weighting.sigma * (s[i] - s[j]);
      out.value += w * log2_logistic_loss(z);
      const double dz = w * log2_logistic_slope(z) * weighting.sigma;
      out.gradient[sublist.answer_ids[i]] += dz;
      out.gradient[sublist.answer_ids[j]] -= dz;
    }
  }
  return out;
}

LossValue listwise_rank_loss(std::span<const double> student_scores, const RankedList& ranking,
                             const ListwiseOptions& options, Rng& rng) {
  if (ranking.size() != student_scores.size()) throw DimensionError("listwise_rank_loss: ranking length mismatch");
  const Sublist sublist = sample_sublist(ranking, options.plan, rng);
  switch (options.tag.loss) {
    case ListwiseLoss::kListMle: return listmle_loss(student_scores, sublist);
    case ListwiseLoss::kListNet: return listnet_loss(student_scores, ranking.teacher_scores, sublist);
    case ListwiseLoss::kStListNet:
      return stlistnet_loss(student_scores, ranking.teacher_scores, sublist, options.beta, rng);
    case ListwiseLoss::kLambda: {
      LambdaWeighting w = options.weighting;
      w.variant = options.tag.lambda_variant;
      return lambda_loss(student_scores, ranking.teacher_scores, sublist, w);
    }
  }
  throw ArgumentError("listwise_rank_loss: unknown loss");
}

}  // namespace radi
