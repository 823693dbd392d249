#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "test_util.hpp"
#include "vgmgc/metrics.hpp"
#include "vgmgc/nn/rng.hpp"

using namespace vgmgc;

namespace {

Labels random_labels(std::size_t n, int k, nn::Rng& rng) {
  Labels out(n);
  for (int& l : out) l = static_cast<int>(nn::uniform_index(rng, static_cast<std::uint64_t>(k)));
  return out;
}

}  // namespace

TEST_CASE("metric examples") {
  const Labels truth{0, 0, 1, 1};
  CHECK(nmi(truth, truth) == 1.0);
  CHECK(ari(truth, truth) == 1.0);
  CHECK(acc(truth, truth) == 1.0);
  CHECK(f1(truth, truth) == 1.0);

  const Labels crossed{0, 1, 0, 1};
  CHECK(nmi(truth, crossed) == doctest::Approx(0.0));
  CHECK(ari(truth, crossed) == doctest::Approx(-0.5));
  CHECK(acc(truth, crossed) == doctest::Approx(0.5));

  const Labels merged{0, 0, 0, 1};
  CHECK(acc(truth, merged) == doctest::Approx(0.75));
  CHECK(f1(truth, merged) == doctest::Approx(11.0 / 15.0));

  const Labels single{3, 3, 3, 3};
  CHECK(f1(truth, single) == doctest::Approx(1.0 / 3.0));
  CHECK(acc(truth, single) == doctest::Approx(0.5));
  CHECK(nmi(truth, single) == 0.0);
}

TEST_CASE("metrics reject bad input") {
  const Labels empty;
  const Labels two{0, 1};
  const Labels three{0, 1, 1};
  CHECK_THROWS_AS(nmi(empty, empty), InvalidArgument);
  CHECK_THROWS_AS(acc(two, three), InvalidArgument);
  CHECK_THROWS_AS(evaluate(two, three), InvalidArgument);
}

TEST_CASE("contingency table") {
  const Labels truth{5, 5, 9, 9, 9};
  const Labels pred{1, 0, 0, 0, 1};
  const Contingency c = Contingency::build(truth, pred);
  CHECK(c.n == 5);
  CHECK(c.true_classes() == 2);
  CHECK(c.pred_clusters() == 2);
  CHECK(c.counts[0] == std::vector<std::size_t>{1, 1});
  CHECK(c.counts[1] == std::vector<std::size_t>{2, 1});
  CHECK(c.row_sums == std::vector<std::size_t>{2, 3});
  CHECK(c.col_sums == std::vector<std::size_t>{3, 2});
}

TEST_CASE("hungarian matches brute force") {
  nn::Rng rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    const Index n = 1 + static_cast<Index>(trial % 6);
    nn::Matrix cost(n, n);
    for (Index i = 0; i < cost.size(); ++i) cost.data()[i] = static_cast<double>(nn::uniform_index(rng, 20));
    const std::vector<int> match = hungarian(cost);
    double got = 0.0;
    std::vector<int> used;
    for (Index i = 0; i < n; ++i) {
      REQUIRE(match[static_cast<std::size_t>(i)] >= 0);
      got += cost(i, match[static_cast<std::size_t>(i)]);
      used.push_back(match[static_cast<std::size_t>(i)]);
    }
    std::sort(used.begin(), used.end());
    CHECK(std::adjacent_find(used.begin(), used.end()) == used.end());

    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    double best = 1e300;
    do {
      double total = 0.0;
      for (Index i = 0; i < n; ++i) total += cost(i, perm[static_cast<std::size_t>(i)]);
      best = std::min(best, total);
    } while (std::next_permutation(perm.begin(), perm.end()));
    CHECK(got == best);
  }
}

TEST_CASE("hungarian pads rectangular costs") {
  nn::Matrix cost(2, 3);
  cost << 5, 1, 9, 2, 8, 9;
  CHECK(hungarian(cost) == std::vector<int>{1, 0});

  nn::Matrix tall(3, 1);
  tall << 4, 1, 3;
  const std::vector<int> m = hungarian(tall);
  CHECK(m[1] == 0);
  CHECK(m[0] == -1);
  CHECK(m[2] == -1);
}

TEST_CASE("metrics ignore label names") {
  nn::Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 5 + trial % 30;
    const Labels truth = random_labels(n, 4, rng);
    const Labels pred = random_labels(n, 3 + trial % 3, rng);
    // Bijective relabeling of pred.
    Labels renamed = pred;
    for (int& l : renamed) l = 100 - 7 * l;
    const ClusteringScores a = evaluate(truth, pred);
    const ClusteringScores b = evaluate(truth, renamed);
    CHECK(a.nmi == doctest::Approx(b.nmi).epsilon(1e-12));
    CHECK(a.ari == doctest::Approx(b.ari).epsilon(1e-12));
    CHECK(a.acc == b.acc);
    CHECK(a.f1 == doctest::Approx(b.f1).epsilon(1e-12));
  }
}

TEST_CASE("metric ranges and symmetry") {
  nn::Rng rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + trial % 40;
    const Labels a = random_labels(n, 2 + trial % 4, rng);
    const Labels b = random_labels(n, 2 + trial % 5, rng);
    CHECK(nmi(a, b) == doctest::Approx(nmi(b, a)).epsilon(1e-12));
    CHECK(ari(a, b) == doctest::Approx(ari(b, a)).epsilon(1e-12));
    CHECK(nmi(a, b) >= 0.0);
    CHECK(nmi(a, b) <= 1.0);
    CHECK(ari(a, b) <= 1.0);

    const double accuracy = acc(a, b);
    CHECK(accuracy <= 1.0);
    const Contingency c = Contingency::build(a, b);
    std::size_t biggest = 0;
    for (const auto& row : c.counts) biggest = std::max(biggest, *std::max_element(row.begin(), row.end()));
    CHECK(accuracy >= static_cast<double>(biggest) / static_cast<double>(n));
    CHECK(f1(a, b) >= 0.0);
    CHECK(f1(a, b) <= 1.0);
  }
}
