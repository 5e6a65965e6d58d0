#include <algorithm>
#include <set>

#include "doctest.h"
#include "radi/errors.hpp"
#include "radi/synthdata.hpp"

using namespace radi;

namespace {

TaskSpec small_task() {
  TaskSpec t;
  t.num_answers = 20;
  t.feature_dim = 6;
  t.num_clusters = 4;
  t.min_positives = 1;
  t.max_positives = 4;
  t.label_noise = 0.0;
  t.train_size = 300;
  t.val_size = 80;
  t.test_size = 80;
  return t;
}

}  // namespace

TEST_CASE("generated splits have the requested shapes and ids") {
  Rng rng(1, 0);
  const auto d = generate(small_task(), rng);
  CHECK(d.train.instances.size() == 300);
  CHECK(d.val.instances.size() == 80);
  CHECK(d.test.instances.size() == 80);
  CHECK(d.train.split == Split::kTrain);
  CHECK(d.test.split == Split::kTest);
  std::set<std::uint64_t> ids;
  for (const auto* ds : {&d.train, &d.val, &d.test}) {
    for (const auto& inst : ds->instances) {
      ids.insert(inst.id);
      CHECK(inst.features.size() == 6);
    }
  }
  CHECK(ids.size() == 460);
}

TEST_CASE("train reveals one positive from a single cluster; evaluation splits reveal all") {
  Rng rng(2, 0);
  const auto task = small_task();
  const auto d = generate(task, rng);
  for (const auto& inst : d.train.instances) {
    REQUIRE(inst.revealed_positives.size() == 1);
    CHECK(std::binary_search(inst.full_positives.begin(), inst.full_positives.end(), inst.revealed_positives[0]));
    CHECK(inst.full_positives.size() >= task.min_positives);
    CHECK(inst.full_positives.size() <= task.max_positives);
    CHECK(std::is_sorted(inst.full_positives.begin(), inst.full_positives.end()));
    const auto c = cluster_of(inst.full_positives.front(), task.num_answers, task.num_clusters);
    for (auto a : inst.full_positives) CHECK(cluster_of(a, task.num_answers, task.num_clusters) == c);
    CHECK(inst.annotation_counts.size() == inst.full_positives.size());
  }
  for (const auto& inst : d.test.instances) CHECK(inst.revealed_positives == inst.full_positives);
}

TEST_CASE("singleton positive range reveals the full set") {
  TaskSpec t = small_task();
  t.max_positives = 1;
  Rng rng(3, 0);
  const auto d = generate(t, rng);
  for (const auto& inst : d.train.instances) {
    CHECK(inst.full_positives.size() == 1);
    CHECK(inst.revealed_positives == inst.full_positives);
  }
  CHECK(hidden_positive_rate(d.train) == 0.0);
}

TEST_CASE("generation replays exactly for a fixed seed") {
  TaskSpec t = small_task();
  t.num_answers = 50;
  t.num_clusters = 5;
  Rng a(7, 0), b(7, 0), c(8, 0);
  const auto d1 = generate(t, a);
  const auto d2 = generate(t, b);
  const auto d3 = generate(t, c);
  CHECK(d1.train == d2.train);
  CHECK(d1.test == d2.test);
  CHECK(!(d1.train == d3.train));
}

TEST_CASE("task validation rejects inconsistent specs") {
  TaskSpec t = small_task();
  t.num_clusters = 21;
  CHECK_THROWS_AS(t.validate(), ArgumentError);
  t = small_task();
  t.min_positives = 0;
  CHECK_THROWS_AS(t.validate(), ArgumentError);
  t = small_task();
  t.max_positives = 6;  // clusters hold 5 answers
  CHECK_THROWS_AS(t.validate(), ArgumentError);
  t = small_task();
  t.label_noise = 1.0;
  CHECK_THROWS_AS(t.validate(), ArgumentError);
  Rng rng(1, 0);
  t = small_task();
  t.num_clusters = 0;
  CHECK_THROWS_AS(generate(t, rng), ArgumentError);
}

TEST_CASE("hidden positive rate hand cases") {
  Dataset ds;
  auto make = [](std::vector<std::size_t> full) {
    Instance i;
    i.full_positives = full;
    i.revealed_positives = {full.front()};
    return i;
  };
  ds.instances = {make({1}), make({1, 2}), make({1, 2, 3, 4})};
  CHECK(hidden_positive_rate(ds) == doctest::Approx(5.0 / 12.0).epsilon(1e-15));
  ds.instances = {make({0, 1}), make({3, 4})};
  CHECK(hidden_positive_rate(ds) == 0.5);
  CHECK_THROWS_AS(hidden_positive_rate(Dataset{}), ArgumentError);
}

TEST_CASE("label noise moves one positive to another cluster") {
  TaskSpec t = small_task();
  t.label_noise = 0.9;
  Rng rng(4, 0);
  const auto d = generate(t, rng);
  std::size_t crossed = 0;
  for (const auto& inst : d.train.instances) {
    std::set<std::size_t> clusters;
    for (auto a : inst.full_positives) clusters.insert(cluster_of(a, t.num_answers, t.num_clusters));
    crossed += clusters.size() > 1;
  }
  CHECK(crossed > 150);
}

TEST_CASE("clusters partition the answers contiguously") {
  CHECK(cluster_of(0, 50, 10) == 0);
  CHECK(cluster_of(4, 50, 10) == 0);
  CHECK(cluster_of(5, 50, 10) == 1);
  CHECK(cluster_of(49, 50, 10) == 9);
  CHECK_THROWS_AS(cluster_of(50, 50, 10), ArgumentError);
}

TEST_CASE("relevance vectors are binary or graded") {
  Instance inst;
  inst.full_positives = {1, 3};
  inst.annotation_counts = {2, 5};
  CHECK(relevance_of(inst, 5, false) == DenseVector{0, 1, 0, 1, 0});
  CHECK(relevance_of(inst, 5, true) == DenseVector{0, 2, 0, 5, 0});
  CHECK_THROWS_AS(relevance_of(inst, 3, false), DimensionError);
}

TEST_CASE("split names round-trip") {
  for (auto s : {Split::kTrain, Split::kVal, Split::kTest}) CHECK(split_from_string(to_string(s)) == s);
  CHECK_THROWS_AS(split_from_string("dev"), ArgumentError);
}
