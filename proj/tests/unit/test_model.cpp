#include <cmath>
#include <limits>

#include "doctest.h"
#include "radi/errors.hpp"
#include "radi/model.hpp"

using namespace radi;

namespace {

ScoreModel random_model(std::size_t in, std::vector<std::size_t> hidden, std::size_t out, double dropout, Rng& rng) {
  ScoreModel m = ScoreModel::initialize(in, hidden, out, dropout, rng);
  for (auto& layer : m.mutable_layers()) {
    for (double& b : layer.bias) b = 0.3 * rng.normal();
  }
  return m;
}

DenseVector random_vector(std::size_t n, Rng& rng) {
  DenseVector v(n);
  for (double& x : v) x = rng.normal();
  return v;
}

// Flattens every parameter into one vector and back, so check_gradient can
// differentiate scores . upstream with respect to the parameters.
DenseVector flatten(const ScoreModel& m) {
  DenseVector out;
  for (const auto& l : m.layers()) {
    out.insert(out.end(), l.weights.values().begin(), l.weights.values().end());
    out.insert(out.end(), l.bias.begin(), l.bias.end());
  }
  return out;
}

DenseVector flatten(const ModelGradient& g) {
  DenseVector out;
  for (const auto& l : g.layers) {
    out.insert(out.end(), l.weights.values().begin(), l.weights.values().end());
    out.insert(out.end(), l.bias.begin(), l.bias.end());
  }
  return out;
}

ScoreModel unflatten(const ScoreModel& shape, std::span<const double> theta) {
  ScoreModel m = shape;
  std::size_t pos = 0;
  for (auto& l : m.mutable_layers()) {
    for (double& w : l.weights.values()) w = theta[pos++];
    for (double& b : l.bias) b = theta[pos++];
  }
  return m;
}

}  // namespace

TEST_CASE("zero parameters give zero scores") {
  std::vector<DenseLayer> layers{{DenseMatrix(3, 2), DenseVector(3, 0.0)}, {DenseMatrix(4, 3), DenseVector(4, 0.0)}};
  const ScoreModel m(layers, 0.1);
  CHECK(forward(m, DenseVector{1.0, -2.0}) == DenseVector(4, 0.0));
}

TEST_CASE("a single linear layer computes W x + b") {
  const ScoreModel m({{DenseMatrix(2, 3, {1, 2, 3, -1, 0, 1}), DenseVector{0.5, -0.5}}}, 0.0);
  CHECK(forward(m, DenseVector{1, 1, 2}) == DenseVector{9.5, 0.5});
}

TEST_CASE("two-layer forward matches a hand evaluation") {
  // hidden = relu([[1,-1],[2,0.5],[-1,-1]] x + [0,-1,0.5]); out = [[1,2,-1],[0.5,0,1]] h + [0.1,-0.2]
  const ScoreModel m({{DenseMatrix(3, 2, {1, -1, 2, 0.5, -1, -1}), DenseVector{0, -1, 0.5}},
                      {DenseMatrix(2, 3, {1, 2, -1, 0.5, 0, 1}), DenseVector{0.1, -0.2}}},
                     0.0);
  // x = (2, 1): pre = (1, 3.5, -2.5) -> h = (1, 3.5, 0)
  const auto s = forward(m, DenseVector{2, 1});
  CHECK(s[0] == doctest::Approx(1 + 7 + 0.1).epsilon(1e-15));
  CHECK(s[1] == doctest::Approx(0.5 - 0.2).epsilon(1e-15));
}

TEST_CASE("model composition is validated") {
  CHECK_THROWS_AS(ScoreModel({}, 0.0), ArgumentError);
  CHECK_THROWS_AS(ScoreModel({{DenseMatrix(2, 2), DenseVector(2)}}, 1.0), ArgumentError);
  CHECK_THROWS_AS(ScoreModel({{DenseMatrix(2, 2), DenseVector(3)}}, 0.0), DimensionError);
  CHECK_THROWS_AS(ScoreModel({{DenseMatrix(3, 2), DenseVector(3)}, {DenseMatrix(2, 4), DenseVector(2)}}, 0.0),
                  DimensionError);
  Rng rng(1, 0);
  const ScoreModel m = ScoreModel::initialize(4, std::vector<std::size_t>{5}, 3, 0.1, rng);
  CHECK_THROWS_AS(forward(m, DenseVector(3)), DimensionError);
  CHECK(m.num_parameters() == 5 * 4 + 5 + 3 * 5 + 3);
}

TEST_CASE("initialisation is deterministic and checksums track parameters") {
  Rng a(4, 4), b(4, 4);
  const auto m1 = ScoreModel::initialize(6, std::vector<std::size_t>{8, 8}, 5, 0.1, a);
  const auto m2 = ScoreModel::initialize(6, std::vector<std::size_t>{8, 8}, 5, 0.1, b);
  CHECK(m1 == m2);
  CHECK(m1.checksum() == m2.checksum());
  ScoreModel m3 = m1;
  m3.mutable_layers()[0].bias[0] = std::nextafter(m3.layers()[0].bias[0], 1.0);
  CHECK(m3.checksum() != m1.checksum());
}

TEST_CASE("MC dropout at rate zero repeats the deterministic forward") {
  Rng rng(2, 0);
  const auto m = random_model(5, {7, 6}, 4, 0.0, rng);
  const auto x = random_vector(5, rng);
  Rng mc(2, 1);
  const auto passes = mc_dropout_scores(m, x, 6, mc);
  REQUIRE(passes.size() == 6);
  for (const auto& p : passes) CHECK(p == forward(m, x));
  CHECK_THROWS_AS(mc_dropout_scores(m, x, 0, mc), ArgumentError);
}

TEST_CASE("MC dropout is reproducible and a single pass equals one stochastic forward") {
  Rng rng(3, 0);
  const auto m = random_model(5, {7}, 4, 0.3, rng);
  const auto x = random_vector(5, rng);
  Rng a(8, 8), b(8, 8), c(8, 8);
  CHECK(mc_dropout_scores(m, x, 5, a) == mc_dropout_scores(m, x, 5, b));
  Rng d(8, 8);
  const auto one = mc_dropout_scores(m, x, 1, d);
  CHECK(one.front() == forward_trace(m, x, &c).scores);
}

TEST_CASE("inverted dropout keeps the expected scores") {
  Rng rng(5, 0);
  const auto m = random_model(4, {6}, 3, 0.5, rng);
  const auto x = random_vector(4, rng);
  const auto exact = forward(m, x);
  Rng mc(5, 1);
  const std::size_t passes = 10000;
  const auto draws = mc_dropout_scores(m, x, passes, mc);
  for (std::size_t a = 0; a < exact.size(); ++a) {
    double mean = 0.0, sq = 0.0;
    for (const auto& d : draws) mean += d[a];
    mean /= passes;
    for (const auto& d : draws) sq += (d[a] - mean) * (d[a] - mean);
    const double se = std::sqrt(sq / (passes - 1) / passes);
    CHECK(std::abs(mean - exact[a]) <= 3.0 * se + 1e-12);
  }
}

TEST_CASE("backward of a linear model with a unit upstream returns the features") {
  const ScoreModel m({{DenseMatrix(3, 2, {1, 2, 3, 4, 5, 6}), DenseVector{0, 0, 0}}}, 0.0);
  const DenseVector x{0.7, -1.5};
  const auto g = backward(m, x, DenseVector{0, 1, 0});
  CHECK(g.layers[0].weights(1, 0) == 0.7);
  CHECK(g.layers[0].weights(1, 1) == -1.5);
  CHECK(g.layers[0].weights(0, 0) == 0.0);
  CHECK(g.layers[0].bias == DenseVector{0, 1, 0});
  const auto zero = backward(m, x, DenseVector{0, 0, 0});
  CHECK(zero.squared_norm() == 0.0);
  CHECK_THROWS_AS(backward(m, x, DenseVector{1, 0}), DimensionError);
}

TEST_CASE("backward matches finite differences on 20 random models") {
  Rng rng(6, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const auto m = random_model(4, {5, 3 + rng.below(3)}, 3, 0.1, rng);
    const auto x = random_vector(4, rng);
    const auto up = random_vector(3, rng);
    // keep clear of ReLU kinks, where the derivative is undefined
    const ForwardTrace t = forward_trace(m, x);
    bool near_kink = false;
    for (std::size_t l = 0; l + 1 < m.layers().size(); ++l) {
      auto pre = m.layers()[l].weights.multiply(t.inputs[l]);
      for (std::size_t i = 0; i < pre.size(); ++i) near_kink |= std::abs(pre[i] + m.layers()[l].bias[i]) < 1e-3;
    }
    if (near_kink) continue;
    auto f = [&](std::span<const double> theta) { return dot(forward(unflatten(m, theta), x), up); };
    auto g = [&](std::span<const double> theta) { return flatten(backward(unflatten(m, theta), x, up)); };
    CHECK(check_gradient(f, g, flatten(m)) <= 1e-5);
  }
}

TEST_CASE("sgd_step clipping and update rules") {
  const ScoreModel m({{DenseMatrix(1, 2, {1.0, 2.0}), DenseVector{0.5}}}, 0.0);
  ModelGradient zero = ModelGradient::zeros_like(m);
  CHECK(sgd_step(m, zero, 0.1, 0.1) == m);

  ModelGradient g = ModelGradient::zeros_like(m);
  g.layers[0].weights(0, 0) = 6.0;
  g.layers[0].weights(0, 1) = 8.0;  // norm 10
  const auto unclipped = sgd_step(m, g, 1.0, std::numeric_limits<double>::infinity());
  CHECK(unclipped.layers()[0].weights(0, 0) == -5.0);
  CHECK(unclipped.layers()[0].weights(0, 1) == -6.0);

  const auto clipped = sgd_step(m, g, 1.0, 0.1);
  CHECK(clipped.layers()[0].weights(0, 0) == doctest::Approx(1.0 - 0.06).epsilon(1e-14));
  CHECK(clipped.layers()[0].weights(0, 1) == doctest::Approx(2.0 - 0.08).epsilon(1e-14));

  ModelGradient bad = g;
  bad.layers[0].bias[0] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(sgd_step(m, bad, 0.1, 0.1), TrainingError);
  CHECK_THROWS_AS(sgd_step(m, g, 0.0, 0.1), ArgumentError);
}

TEST_CASE("momentum accumulates velocity") {
  ScoreModel m({{DenseMatrix(1, 1, {0.0}), DenseVector{0.0}}}, 0.0);
  SgdOptimizer opt(0.5);
  ModelGradient g = ModelGradient::zeros_like(m);
  g.layers[0].weights(0, 0) = 1.0;
  opt.step(m, g, 1.0, 100.0);
  CHECK(m.layers()[0].weights(0, 0) == -1.0);
  opt.step(m, g, 1.0, 100.0);
  CHECK(m.layers()[0].weights(0, 0) == -2.5);
}
