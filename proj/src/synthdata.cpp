#include "radi/synthdata.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "radi/errors.hpp"

namespace radi {

void TaskSpec::validate() const {
  if (num_answers == 0) throw ArgumentError("TaskSpec: num_answers must be positive");
  if (feature_dim == 0) throw ArgumentError("TaskSpec: feature_dim must be positive");
  if (num_clusters == 0 || num_clusters > num_answers) {
    throw ArgumentError("TaskSpec: cluster count must lie in [1, num_answers]");
  }
  if (min_positives < 1 || min_positives > max_positives || max_positives > num_answers) {
    throw ArgumentError("TaskSpec: positives range must satisfy 1 <= min <= max <= N");
  }
  const std::size_t smallest_cluster = num_answers / num_clusters;
  if (max_positives > smallest_cluster) {
    throw ArgumentError("TaskSpec: max_positives exceeds the smallest cluster size");
  }
  if (!(label_noise >= 0.0 && label_noise < 1.0)) throw ArgumentError("TaskSpec: label_noise must lie in [0, 1)");
  if (!(feature_noise >= 0.0)) throw ArgumentError("TaskSpec: feature_noise must be non-negative");
}

std::string to_string(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "train";
}

Split split_from_string(const std::string& name) {
  if (name == "train") return Split::kTrain;
  if (name == "val") return Split::kVal;
  if (name == "test") return Split::kTest;
  throw ArgumentError("unknown split '" + name + "'");
}

std::size_t cluster_of(std::size_t answer, std::size_t num_answers, std::size_t num_clusters) {
  if (answer >= num_answers) throw ArgumentError("cluster_of: answer index out of range");
  // cluster c covers [c*N/C, (c+1)*N/C)
  for (std::size_t c = 0; c < num_clusters; ++c) {
    if (answer < (c + 1) * num_answers / num_clusters) return c;
  }
  return num_clusters - 1;
}

namespace {

std::pair<std::size_t, std::size_t> cluster_range(std::size_t c, std::size_t n, std::size_t k) {
  return {c * n / k, (c + 1) * n / k};
}

DenseVector gaussian_vector(std::size_t dim, Rng& rng) {
  DenseVector v(dim);
  for (double& x : v) x = rng.normal();
  return v;
}

// Partial Fisher-Yates: the first `count` entries become a uniform sample.
std::vector<std::size_t> sample_without_replacement(std::vector<std::size_t> pool, std::size_t count,
                                                    Rng& rng) {
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + rng.below(pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(count);
  return pool;
}

Dataset make_split(const TaskSpec& task, Split split, std::size_t size, std::uint64_t id_offset,
                   const std::vector<DenseVector>& cluster_protos,
                   const std::vector<DenseVector>& answer_protos, Rng rng) {
  Dataset ds{split, task, {}};
  ds.instances.reserve(size);
  const std::size_t n = task.num_answers;
  const std::size_t k = task.num_clusters;
  for (std::size_t i = 0; i < size; ++i) {
    Instance inst;
    inst.id = id_offset + i;
    const std::size_t cluster = rng.below(k);
    const auto [lo, hi] = cluster_range(cluster, n, k);
    const std::size_t count =
        task.min_positives + rng.below(task.max_positives - task.min_positives + 1);
    std::vector<std::size_t> members(hi - lo);
    std::iota(members.begin(), members.end(), lo);
    inst.full_positives = sample_without_replacement(std::move(members), count, rng);

    if (task.label_noise > 0.0 && k > 1 && rng.uniform() < task.label_noise) {
      const std::size_t other = (cluster + 1 + rng.below(k - 1)) % k;
      const auto [olo, ohi] = cluster_range(other, n, k);
      inst.full_positives[rng.below(count)] = olo + rng.below(ohi - olo);
    }

    inst.features = cluster_protos[cluster];
    const double weight = task.answer_signal / static_cast<double>(count);
    for (std::size_t a : inst.full_positives) {
      for (std::size_t d = 0; d < task.feature_dim; ++d) inst.features[d] += weight * answer_protos[a][d];
    }
    for (double& x : inst.features) x += task.feature_noise * rng.normal();

    inst.annotation_counts.resize(count);
    for (auto& c : inst.annotation_counts) c = 1 + rng.below(5);

    if (split == Split::kTrain) {
      inst.revealed_positives = {inst.full_positives[rng.below(count)]};
    } else {
      inst.revealed_positives = inst.full_positives;
    }

    // keep annotation counts aligned while sorting the positive set
    std::vector<std::size_t> order(count);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return inst.full_positives[a] < inst.full_positives[b]; });
    std::vector<std::size_t> sorted_pos(count), sorted_counts(count);
    for (std::size_t j = 0; j < count; ++j) {
      sorted_pos[j] = inst.full_positives[order[j]];
      sorted_counts[j] = inst.annotation_counts[order[j]];
    }
    inst.full_positives = std::move(sorted_pos);
    inst.annotation_counts = std::move(sorted_counts);
    std::sort(inst.revealed_positives.begin(), inst.revealed_positives.end());
    ds.instances.push_back(std::move(inst));
  }
  return ds;
}

}  // namespace

DatasetSplits generate(const TaskSpec& task, Rng& rng) {
  task.validate();
  Rng proto_rng = rng.child("prototypes");
  std::vector<DenseVector> cluster_protos, answer_protos;
  for (std::size_t c = 0; c < task.num_clusters; ++c) cluster_protos.push_back(gaussian_vector(task.feature_dim, proto_rng));
  for (std::size_t a = 0; a < task.num_answers; ++a) answer_protos.push_back(gaussian_vector(task.feature_dim, proto_rng));

  DatasetSplits out;
  out.train = make_split(task, Split::kTrain, task.train_size, 0, cluster_protos, answer_protos,
                         rng.child("train"));
  out.val = make_split(task, Split::kVal, task.val_size, task.train_size, cluster_protos,
                       answer_protos, rng.child("val"));
  out.test = make_split(task, Split::kTest, task.test_size, task.train_size + task.val_size,
                        cluster_protos, answer_protos, rng.child("test"));
  return out;
}

double hidden_positive_rate(const Dataset& dataset) {
  if (dataset.instances.empty()) throw ArgumentError("hidden_positive_rate: empty dataset");
  double total = 0.0;
  for (const auto& inst : dataset.instances) {
    const double full = static_cast<double>(inst.full_positives.size());
    const double revealed = static_cast<double>(inst.revealed_positives.size());
    total += (full - revealed) / full;
  }
  return total / static_cast<double>(dataset.instances.size());
}

DenseVector relevance_of(const Instance& instance, std::size_t num_answers, bool graded) {
  DenseVector rel(num_answers, 0.0);
  for (std::size_t j = 0; j < instance.full_positives.size(); ++j) {
    const std::size_t a = instance.full_positives[j];
    if (a >= num_answers) throw DimensionError("relevance_of: answer index out of range");
    rel[a] = graded && j < instance.annotation_counts.size()
                 ? static_cast<double>(instance.annotation_counts[j])
                 : 1.0;
  }
  return rel;
}

}  // namespace radi
