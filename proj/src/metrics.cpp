#include "radi/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "radi/errors.hpp"

namespace radi {

std::vector<std::size_t> top_k(std::span<const double> scores, std::size_t k) {
  k = std::min(k, scores.size());
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::partial_sort(idx.begin(), idx.begin() + k, idx.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b] || (scores[a] == scores[b] && a < b);
  });
  idx.resize(k);
  return idx;
}

int acc_at_1(std::span<const double> scores, std::span<const std::size_t> positives) {
  if (positives.empty()) throw ArgumentError("acc_at_1: empty positive set");
  return hit_at_k(scores, positives, 1);
}

int hit_at_k(std::span<const double> scores, std::span<const std::size_t> positives, std::size_t k) {
  if (k == 0 || k > scores.size()) throw ArgumentError("hit_at_k: k must lie in [1, N]");
  for (std::size_t a : top_k(scores, k)) {
    if (std::find(positives.begin(), positives.end(), a) != positives.end()) return 1;
  }
  return 0;
}

std::optional<double> ndcg_at_k(std::span<const double> scores, std::span<const double> relevance, std::size_t k) {
  if (scores.size() != relevance.size()) throw DimensionError("ndcg_at_k: relevance length mismatch");
  if (k == 0) throw ArgumentError("ndcg_at_k: k must be positive");
  for (double r : relevance) {
    if (!(r >= 0.0)) throw ArgumentError("ndcg_at_k: relevance must be non-negative");
  }
  auto dcg = [&](const std::vector<std::size_t>& order) {
    double total = 0.0;
    for (std::size_t r = 0; r < order.size(); ++r) {
      total += (std::exp2(relevance[order[r]]) - 1.0) / std::log2(static_cast<double>(r) + 2.0);
    }
    return total;
  };
  const double ideal = dcg(top_k(relevance, k));
  if (ideal <= 0.0) return std::nullopt;
  return dcg(top_k(scores, k)) / ideal;
}

EvalResult evaluate(const ScoreModel& model, const Dataset& dataset, std::size_t k, bool graded) {
  EvalResult out;
  out.k = k;
  out.num_instances = dataset.instances.size();
  if (dataset.instances.empty()) return out;
  double acc = 0.0, hit = 0.0, ndcg = 0.0;
  std::size_t ndcg_count = 0;
  for (const auto& inst : dataset.instances) {
    const ScoreVector scores = forward(model, inst.features);
    acc += acc_at_1(scores, inst.full_positives);
    hit += hit_at_k(scores, inst.full_positives, std::min(k, scores.size()));
    const auto n = ndcg_at_k(scores, relevance_of(inst, scores.size(), graded), k);
    if (n) {
      ndcg += *n;
      ++ndcg_count;
    } else {
      ++out.ndcg_excluded;
    }
  }
  const double count = static_cast<double>(out.num_instances);
  out.acc_at_1 = acc / count;
  out.hit_at_k = hit / count;
  out.ndcg_at_k = ndcg_count ? ndcg / static_cast<double>(ndcg_count) : 0.0;
  return out;
}

double hidden_positive_recovery(const ScoreModel& model, const Dataset& dataset, std::size_t k) {
  double total = 0.0;
  std::size_t counted = 0;
  for (const auto& inst : dataset.instances) {
    std::vector<std::size_t> hidden;
    std::set_difference(inst.full_positives.begin(), inst.full_positives.end(), inst.revealed_positives.begin(),
                        inst.revealed_positives.end(), std::back_inserter(hidden));
    if (hidden.empty()) continue;
    const auto top = top_k(forward(model, inst.features), k);
    std::size_t found = 0;
    for (std::size_t a : hidden) found += std::find(top.begin(), top.end(), a) != top.end();
    total += static_cast<double>(found) / static_cast<double>(hidden.size());
    ++counted;
  }
  return counted ? total / static_cast<double>(counted) : 0.0;
}

}  // namespace radi
