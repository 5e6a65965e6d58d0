#include <cmath>
#include <numbers>
#include <set>

#include "doctest.h"
#include "oracles.hpp"
#include "radi/distill_core.hpp"
#include "radi/errors.hpp"
#include "radi/listwise.hpp"

using namespace radi;

namespace {

RankedList identity_ranking(std::size_t n) {
  DenseVector s(n);
  for (std::size_t i = 0; i < n; ++i) s[i] = static_cast<double>(n - i);
  return teacher_ranking(s);
}

Sublist whole(std::vector<std::size_t> ids) {
  Sublist s;
  s.answer_ids = ids;
  for (std::size_t i = 0; i < ids.size(); ++i) s.source_ranks.push_back(i);
  s.hot_count = ids.size();
  return s;
}

DenseVector random_scores(std::size_t n, Rng& rng, double scale = 1.5) {
  DenseVector v(n);
  for (double& x : v) x = scale * rng.normal();
  return v;
}

std::vector<double> cold_frequencies(SamplingScheme scheme, double smoothing, std::size_t trials, Rng& rng) {
  const RankedList r = identity_ranking(5);
  SamplingPlan plan{2, 1, scheme, smoothing, false};
  std::vector<double> counts(3, 0.0);
  for (std::size_t t = 0; t < trials; ++t) {
    const Sublist s = sample_sublist(r, plan, rng);
    counts[s.source_ranks.back() - 2] += 1.0;
  }
  return counts;
}

}  // namespace

TEST_CASE("cold weights follow the rank laws") {
  CHECK(cold_weight(SamplingScheme::kZipf, 1.0, 3) == doctest::Approx(1.0 / 3.0));
  CHECK(cold_weight(SamplingScheme::kExp, std::log(2.0), 3) == doctest::Approx(0.25));
  CHECK(cold_weight(SamplingScheme::kRandom, 5.0, 7) == 1.0);
}

TEST_CASE("single cold draw frequencies pass chi-square goodness of fit") {
  Rng rng(41, 0);
  const auto zipf = cold_frequencies(SamplingScheme::kZipf, 1.0, 100000, rng);
  CHECK(oracle::chi_square_2dof_pvalue(oracle::chi_square(zipf, {6.0 / 11, 3.0 / 11, 2.0 / 11})) > 0.01);
  const auto exp = cold_frequencies(SamplingScheme::kExp, std::numbers::ln2, 100000, rng);
  CHECK(oracle::chi_square_2dof_pvalue(oracle::chi_square(exp, {4.0 / 7, 2.0 / 7, 1.0 / 7})) > 0.01);
}

TEST_CASE("Zipf with vanishing smoothing approaches random sampling") {
  const std::size_t trials = 100000;
  Rng a(42, 0), b(42, 0);
  const auto zipf = cold_frequencies(SamplingScheme::kZipf, 1e-6, trials, a);
  const auto uniform = cold_frequencies(SamplingScheme::kRandom, 1.0, trials, b);
  double tv = 0.0;
  for (std::size_t i = 0; i < 3; ++i) tv += 0.5 * std::abs(zipf[i] - uniform[i]) / trials;
  CHECK(tv <= 1e-4);
}

TEST_CASE("sublists keep hot then cold in rank order without repeats") {
  Rng rng(43, 0);
  DenseVector teacher = random_scores(30, rng);
  const auto ranking = teacher_ranking(teacher);
  for (auto scheme : {SamplingScheme::kExp, SamplingScheme::kZipf, SamplingScheme::kRandom}) {
    for (int trial = 0; trial < 200; ++trial) {
      const Sublist s = sample_sublist(ranking, {8, 6, scheme, 0.5, false}, rng);
      REQUIRE(s.size() == 14);
      CHECK(s.hot_count == 8);
      for (std::size_t i = 0; i < 8; ++i) CHECK(s.source_ranks[i] == i);
      for (std::size_t i = 9; i < 14; ++i) CHECK(s.source_ranks[i] > s.source_ranks[i - 1]);
      CHECK(s.source_ranks[8] >= 8);
      const std::set<std::size_t> unique(s.answer_ids.begin(), s.answer_ids.end());
      CHECK(unique.size() == s.size());
      for (std::size_t i = 0; i < s.size(); ++i) CHECK(s.answer_ids[i] == ranking.permutation[s.source_ranks[i]]);
    }
  }
}

TEST_CASE("sampling with replacement drops repeated draws") {
  Rng rng(44, 0);
  const auto ranking = identity_ranking(12);
  const Sublist s = sample_sublist(ranking, {2, 9, SamplingScheme::kExp, 3.0, true}, rng);
  const std::set<std::size_t> unique(s.answer_ids.begin(), s.answer_ids.end());
  CHECK(unique.size() == s.size());
  CHECK(s.size() < 11);
}

TEST_CASE("full plans and degenerate plans") {
  Rng rng(45, 0);
  const auto ranking = identity_ranking(6);
  const Sublist full = sample_sublist(ranking, {0, 0, SamplingScheme::kFull, 1.0, false}, rng);
  CHECK(full.answer_ids == ranking.permutation);
  const Sublist hot_only = sample_sublist(ranking, {6, 0, SamplingScheme::kZipf, 1.0, false}, rng);
  CHECK(hot_only.answer_ids == ranking.permutation);
  CHECK_THROWS_AS(sample_sublist(ranking, {5, 2, SamplingScheme::kZipf, 1.0, false}, rng), ArgumentError);
  CHECK_THROWS_AS(sample_sublist(ranking, {2, 2, SamplingScheme::kZipf, 0.0, false}, rng), ArgumentError);
}

TEST_CASE("ListMLE hand values") {
  CHECK(listmle_loss(DenseVector{1.0, 2.0}, whole({1})).value == 0.0);
  CHECK(listmle_loss(DenseVector{0.3, 0.3}, whole({0, 1})).value == doctest::Approx(std::log(2.0)).epsilon(1e-14));
  const double v = listmle_loss(DenseVector{2.0, 1.0, 0.0}, whole({0, 1, 2})).value;
  CHECK(v == doctest::Approx(-std::log(std::exp(2.0) / (std::exp(2.0) + std::exp(1.0) + 1.0) *
                                       std::exp(1.0) / (std::exp(1.0) + 1.0)))
                 .epsilon(1e-14));
  CHECK(v == doctest::Approx(0.7208).epsilon(1e-4));
}

TEST_CASE("ListMLE decreases as the target order gets more separated") {
  double previous = 1e300;
  for (double c = 0.0; c <= 10.0; c += 0.5) {
    const double v = listmle_loss(DenseVector{4 * c, 3 * c, 2 * c, c}, whole({0, 1, 2, 3})).value;
    CHECK(v < previous);
    previous = v;
  }
  CHECK(previous < 1e-3);
}

TEST_CASE("ListMLE agrees with the naive Plackett-Luce oracle") {
  Rng rng(46, 0);
  for (int trial = 0; trial < 50; ++trial) {
    const DenseVector s = random_scores(9, rng);
    const std::vector<std::size_t> ids{4, 0, 7, 2, 8};
    std::vector<double> ordered;
    for (auto a : ids) ordered.push_back(s[a]);
    CHECK(std::abs(listmle_loss(s, whole(ids)).value - oracle::listmle(ordered)) <= 1e-12);
  }
}

TEST_CASE("ListNet hand values and Gibbs inequality") {
  CHECK(listnet_loss(DenseVector(4, 1.0), DenseVector(4, 1.0), whole({0, 1, 2, 3})).value ==
        doctest::Approx(std::log(4.0)).epsilon(1e-14));
  const double v = listnet_loss(DenseVector{0.0, 1.0}, DenseVector{1.0, 0.0}, whole({0, 1})).value;
  const double pt = 1.0 / (1.0 + std::exp(-1.0));
  CHECK(v == doctest::Approx(-(pt * std::log(1 - pt) + (1 - pt) * std::log(pt))).epsilon(1e-14));
  CHECK(v == doctest::Approx(1.0443).epsilon(1e-4));

  Rng rng(47, 0);
  const auto sub = whole({0, 2, 3, 5});
  for (int trial = 0; trial < 1000; ++trial) {
    const DenseVector s = random_scores(6, rng), t = random_scores(6, rng);
    const DenseVector pt_sub = softmax(DenseVector{t[0], t[2], t[3], t[5]});
    double entropy = 0.0;
    for (double p : pt_sub) entropy -= p * std::log(p);
    CHECK(listnet_loss(s, t, sub).value - entropy >= -1e-12);
    CHECK(std::abs(listnet_loss(t, t, sub).value - entropy) <= 1e-12);
  }
}

TEST_CASE("Gumbel noise has the Euler-Mascheroni mean") {
  Rng rng(48, 0);
  const std::size_t n = 10000;
  const DenseVector eps = gumbel_noise(n, 1.0, rng);
  double mean = 0.0, sq = 0.0;
  for (double e : eps) mean += e / n;
  for (double e : eps) sq += (e - mean) * (e - mean);
  const double se = std::sqrt(sq / (n - 1) / n);
  CHECK(std::abs(mean - std::numbers::egamma) <= 3.0 * se);
  CHECK_THROWS_AS(gumbel_noise(3, -1.0, rng), ArgumentError);
}

TEST_CASE("STListNet reduces to ListNet at zero noise and replays under a fixed stream") {
  Rng rng(49, 0);
  const DenseVector s = random_scores(6, rng), t = random_scores(6, rng);
  const auto sub = whole({5, 1, 3});
  Rng noise(1, 1);
  const auto zero = stlistnet_loss(s, t, sub, 0.0, noise);
  const auto plain = listnet_loss(s, t, sub);
  CHECK(zero.value == plain.value);
  CHECK(zero.gradient == plain.gradient);
  Rng a(2, 2), b(2, 2);
  CHECK(stlistnet_loss(s, t, sub, 1.0, a).value == stlistnet_loss(s, t, sub, 1.0, b).value);
}

TEST_CASE("RankNet lambda loss hand values") {
  const LambdaWeighting ranknet{LambdaVariant::kRankNet, 1.0, 5.0};
  const DenseVector t{1.0, 0.0};
  CHECK(lambda_loss(DenseVector{0.0, 0.0}, t, whole({0, 1}), ranknet).value == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(lambda_loss(DenseVector{-std::log(3.0), 0.0}, t, whole({0, 1}), ranknet).value ==
        doctest::Approx(2.0).epsilon(1e-14));
  CHECK(lambda_loss(DenseVector{60.0, 0.0}, t, whole({0, 1}), ranknet).value < 1e-20);
  CHECK_THROWS_AS(lambda_loss(DenseVector{0.0, 0.0}, t, whole({0}), ranknet), ArgumentError);
}

TEST_CASE("NDCG-Loss1 weights follow gain over student-rank discount") {
  // three items in teacher order: rel = (2, 1, 0), gains (3, 1, 0) / maxDCG
  const LambdaWeighting w{LambdaVariant::kNdcg1, 1.0, 5.0};
  const DenseVector s{0.0, 1.0, -1.0};  // student ranks: item0 -> 2, item1 -> 1, item2 -> 3
  const double max_dcg = 3.0 + 1.0 / std::log2(3.0);
  const double g0 = 3.0 / max_dcg, g1 = 1.0 / max_dcg;
  auto pair = [](double d) { return std::log2(1.0 + std::exp(-d)); };
  const double expected = g0 / std::log2(3.0) * (pair(-1.0) + pair(1.0)) + g1 / std::log2(2.0) * pair(2.0);
  CHECK(lambda_loss(s, DenseVector(3, 0.0), whole({0, 1, 2}), w).value == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("every listwise loss matches finite differences") {
  Rng rng(50, 0);
  const std::vector<ListwiseLossTag> tags{
      {ListwiseLoss::kListMle},
      {ListwiseLoss::kListNet},
      {ListwiseLoss::kStListNet},
      {ListwiseLoss::kLambda, LambdaVariant::kRankNet},
      {ListwiseLoss::kLambda, LambdaVariant::kNdcg1},
      {ListwiseLoss::kLambda, LambdaVariant::kNdcg2},
      {ListwiseLoss::kLambda, LambdaVariant::kNdcg2PlusPlus},
  };
  for (const auto& tag : tags) {
    CAPTURE(to_string(tag));
    for (int trial = 0; trial < 20; ++trial) {
      const DenseVector teacher = random_scores(15, rng), student = random_scores(15, rng);
      const RankedList ranking = teacher_ranking(teacher);
      ListwiseOptions opt{{5, 4, SamplingScheme::kZipf, 1.0, false}, tag, 0.7, {tag.lambda_variant, 1.3, 5.0}};
      const RngState fixed = rng.child(static_cast<std::uint64_t>(trial)).state();
      auto eval = [&](std::span<const double> s) {
        Rng r(fixed);
        return listwise_rank_loss(s, ranking, opt, r);
      };
      auto f = [&](std::span<const double> s) { return eval(s).value; };
      auto g = [&](std::span<const double> s) { return eval(s).gradient; };
      CHECK(check_gradient(f, g, student) <= 1e-5);
      CHECK(eval(student).gradient.size() == 15);
    }
  }
}

TEST_CASE("listwise dispatch: full ListNet and determinism") {
  Rng rng(51, 0);
  const DenseVector teacher = random_scores(10, rng), student = random_scores(10, rng);
  const RankedList ranking = teacher_ranking(teacher);
  ListwiseOptions full{{0, 0, SamplingScheme::kFull, 1.0, false}, {ListwiseLoss::kListNet}, 1.0, {}};
  Rng r1(3, 3);
  const auto a = listwise_rank_loss(student, ranking, full, r1);
  Sublist all = whole(ranking.permutation);
  CHECK(std::abs(a.value - listnet_loss(student, teacher, all).value) <= 1e-12);

  ListwiseOptions hot_all{{10, 0, SamplingScheme::kZipf, 1.0, false}, {ListwiseLoss::kListNet}, 1.0, {}};
  Rng r2(3, 3);
  CHECK(std::abs(listwise_rank_loss(student, ranking, hot_all, r2).value - a.value) <= 1e-12);

  ListwiseOptions sampled{{3, 3, SamplingScheme::kExp, 1.0, false}, {ListwiseLoss::kListMle}, 1.0, {}};
  Rng r3(4, 4), r4(4, 4);
  CHECK(listwise_rank_loss(student, ranking, sampled, r3).value == listwise_rank_loss(student, ranking, sampled, r4).value);
}

TEST_CASE("loss tags and scheme names round-trip") {
  for (const char* name : {"listmle", "listnet", "stlistnet", "lambda:ranknet", "lambda:ndcg1", "lambda:ndcg2", "lambda:ndcg2pp"}) {
    CHECK(to_string(listwise_loss_from_string(name)) == name);
  }
  for (const char* name : {"exp", "zipf", "random", "full"}) CHECK(to_string(sampling_scheme_from_string(name)) == name);
  CHECK_THROWS_AS(listwise_loss_from_string("lambda:ndcg3"), ArgumentError);
  CHECK_THROWS_AS(sampling_scheme_from_string("pareto"), ArgumentError);
}
