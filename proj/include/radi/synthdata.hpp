#ifndef RADI_SYNTHDATA_HPP_
#define RADI_SYNTHDATA_HPP_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "radi/numerics.hpp"
#include "radi/rng.hpp"

namespace radi {

/// Parameters of a synthetic multi-label task with one revealed label per
/// training instance.
struct TaskSpec {
  std::size_t num_answers = 50;
  std::size_t feature_dim = 32;
  std::size_t num_clusters = 10;
  std::size_t min_positives = 1;
  std::size_t max_positives = 5;
  /// Probability that one positive is swapped for an answer from another cluster.
  double label_noise = 0.3;
  /// Standard deviation of isotropic feature noise.
  double feature_noise = 3.0;
  /// Weight of the answer-specific prototypes relative to the cluster prototype.
  double answer_signal = 1.0;
  std::size_t train_size = 2000;
  std::size_t val_size = 500;
  std::size_t test_size = 500;
  std::uint64_t seed = 0;

  void validate() const;
  friend bool operator==(const TaskSpec&, const TaskSpec&) = default;
};

enum class Split { kTrain, kVal, kTest };

std::string to_string(Split split);
Split split_from_string(const std::string& name);

struct Instance {
  std::uint64_t id = 0;
  DenseVector features;
  /// Sorted ground-truth answer indices.
  std::vector<std::size_t> full_positives;
  /// Sorted labels visible to training; subset of full_positives.
  std::vector<std::size_t> revealed_positives;
  /// Annotator counts aligned with full_positives (graded relevance).
  std::vector<std::size_t> annotation_counts;

  friend bool operator==(const Instance&, const Instance&) = default;
};

struct Dataset {
  Split split = Split::kTrain;
  TaskSpec task;
  std::vector<Instance> instances;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

struct DatasetSplits {
  Dataset train;
  Dataset val;
  Dataset test;
};

/// Answers are partitioned into contiguous clusters. Each instance picks a
/// cluster, a positive set inside it, and features
///   x = mu_cluster + answer_signal * mean(nu_a, a in positives) + noise.
/// Training instances reveal exactly one uniformly chosen positive; val and
/// test reveal the full set.
DatasetSplits generate(const TaskSpec& task, Rng& rng);

/// Cluster index of `answer` under the contiguous partition used by generate().
std::size_t cluster_of(std::size_t answer, std::size_t num_answers, std::size_t num_clusters);

/// Mean over instances of |full \ revealed| / |full|.
double hidden_positive_rate(const Dataset& dataset);

/// Relevance vector of length N for one instance: binary on full_positives,
/// or annotation counts when `graded` is set.
DenseVector relevance_of(const Instance& instance, std::size_t num_answers, bool graded);

}  // namespace radi

#endif  // RADI_SYNTHDATA_HPP_
