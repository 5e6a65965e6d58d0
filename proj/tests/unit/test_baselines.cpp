#include <cmath>

#include "doctest.h"
#include "radi/baselines.hpp"
#include "radi/distill_core.hpp"
#include "radi/errors.hpp"
#include "radi/rng.hpp"

using namespace radi;

TEST_CASE("label smoothing hand values") {
  const std::vector<std::size_t> zero{0};
  CHECK(smooth_labels(zero, 3, 0.0).distribution == DenseVector{1.0, 0.0, 0.0});
  const auto t = smooth_labels(zero, 4, 0.3);
  CHECK(t.distribution[0] == doctest::Approx(0.775).epsilon(1e-15));
  for (std::size_t i = 1; i < 4; ++i) CHECK(t.distribution[i] == doctest::Approx(0.075).epsilon(1e-15));
  Rng rng(61, 0);
  for (int trial = 0; trial < 100; ++trial) {
    const double sigma = 0.99 * rng.uniform();
    const std::vector<std::size_t> labels{rng.below(10), rng.below(10)};
    double total = 0.0;
    for (double v : smooth_labels(labels, 10, sigma).distribution) {
      CHECK(v >= 0.0);
      total += v;
    }
    CHECK(std::abs(total - 1.0) <= 1e-12);
  }
  CHECK_THROWS_AS(smooth_labels(zero, 3, 1.0), ArgumentError);
  CHECK_THROWS_AS(smooth_labels(zero, 3, -0.1), ArgumentError);
}

TEST_CASE("smoothed cross-entropy special cases") {
  Rng rng(62, 0);
  DenseVector s(7);
  for (double& v : s) v = rng.normal();
  const SmoothedTarget self{softmax(s), 0.0};
  double entropy = 0.0;
  for (double p : self.distribution) entropy -= p * std::log(p);
  CHECK(smoothed_cross_entropy(s, self).value == doctest::Approx(entropy).epsilon(1e-13));

  const std::vector<std::size_t> labels{2, 5};
  CHECK(smoothed_cross_entropy(DenseVector(7, 0.4), smooth_labels(labels, 7, 0.2)).value ==
        doctest::Approx(std::log(7.0)).epsilon(1e-14));

  for (int trial = 0; trial < 50; ++trial) {
    for (double& v : s) v = 3.0 * rng.normal();
    const std::vector<std::size_t> one{rng.below(7)};
    const auto a = smoothed_cross_entropy(s, smooth_labels(one, 7, 0.0));
    const auto b = classification_loss(s, one);
    CHECK(std::abs(a.value - b.value) <= 1e-12);
    for (std::size_t i = 0; i < 7; ++i) CHECK(std::abs(a.gradient[i] - b.gradient[i]) <= 1e-12);
  }
}

TEST_CASE("pseudo labels unite revealed answers with the teacher top k") {
  const RankedList t = teacher_ranking(DenseVector{0.0, 0.1, 5.0, 0.2, 0.3, 0.4, 0.5, 4.0, 0.6, 3.0});
  const std::vector<std::size_t> seven{7};
  CHECK(pseudo_labels(t, seven, 3).labels == std::vector<std::size_t>{2, 7, 9});
  CHECK(pseudo_labels(t, seven, 0).labels == seven);
  CHECK(pseudo_labels(t, std::vector<std::size_t>{2}, 3).labels.size() == 3);
  for (std::size_t k = 0; k < 10; ++k) {
    const auto small = pseudo_labels(t, std::vector<std::size_t>{1}, k).labels;
    const auto big = pseudo_labels(t, std::vector<std::size_t>{1}, k + 1).labels;
    CHECK(std::includes(big.begin(), big.end(), small.begin(), small.end()));
    CHECK(small.size() <= k + 1);
  }
}

TEST_CASE("vanilla KD hand value and non-negativity") {
  const auto v = vanilla_kd_loss(DenseVector{0.0, 1.0}, DenseVector{1.0, 0.0}, 1.0);
  const double p = 1.0 / (1.0 + std::exp(-1.0));
  const double expected = p * std::log(p / (1 - p)) + (1 - p) * std::log((1 - p) / p);
  CHECK(v.value == doctest::Approx(expected).epsilon(1e-14));
  CHECK(v.value == doctest::Approx(0.4621).epsilon(1e-4));

  Rng rng(63, 0);
  for (int trial = 0; trial < 200; ++trial) {
    DenseVector s(6), t(6);
    for (double& x : s) x = 2.0 * rng.normal();
    for (double& x : t) x = 2.0 * rng.normal();
    CHECK(vanilla_kd_loss(s, t, 0.5 + 3.0 * rng.uniform()).value >= 0.0);
    CHECK(vanilla_kd_loss(t, t, 2.0).value <= 1e-15);
  }
  CHECK_THROWS_AS(vanilla_kd_loss(DenseVector{0.0}, DenseVector{0.0}, 0.0), ArgumentError);
  CHECK_THROWS_AS(vanilla_kd_loss(DenseVector{0.0}, DenseVector{0.0, 1.0}, 1.0), DimensionError);
}

TEST_CASE("baseline losses match finite differences") {
  Rng rng(64, 0);
  for (int trial = 0; trial < 20; ++trial) {
    DenseVector s(9), t(9);
    for (double& x : s) x = 2.0 * rng.normal();
    for (double& x : t) x = 2.0 * rng.normal();
    const double tau = 0.5 + 3.0 * rng.uniform();
    auto kd_f = [&](std::span<const double> x) { return vanilla_kd_loss(x, t, tau).value; };
    auto kd_g = [&](std::span<const double> x) { return vanilla_kd_loss(x, t, tau).gradient; };
    CHECK(check_gradient(kd_f, kd_g, s) <= 1e-5);

    const std::vector<std::size_t> labels{rng.below(9)};
    const auto target = smooth_labels(labels, 9, 0.9 * rng.uniform());
    auto ls_f = [&](std::span<const double> x) { return smoothed_cross_entropy(x, target).value; };
    auto ls_g = [&](std::span<const double> x) { return smoothed_cross_entropy(x, target).gradient; };
    CHECK(check_gradient(ls_f, ls_g, s) <= 1e-5);
  }
}
