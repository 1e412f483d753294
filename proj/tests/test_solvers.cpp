#include <algorithm>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "coreset/harness.hpp"
#include "coreset/solvers.hpp"

using namespace coreset;

namespace {

WeightedSet line(const std::vector<double>& xs, const std::vector<double>& w = {}) {
  WeightedSet s;
  for (std::size_t i = 0; i < xs.size(); ++i)
    s.push_back(Point::dense(static_cast<PointId>(i), {xs[i]}), w.empty() ? 1.0 : w[i]);
  return s;
}

// Independent exhaustive search over assignments (k^n labelings) for tiny inputs.
double brute_force_opt(const CostModel& m, const WeightedSet& a, int k) {
  const std::size_t n = a.size();
  std::size_t total = 1;
  for (std::size_t i = 0; i < n; ++i) total *= static_cast<std::size_t>(k);
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> lab(n);
  for (std::size_t code = 0; code < total; ++code) {
    std::size_t c = code;
    for (std::size_t i = 0; i < n; ++i) lab[i] = static_cast<int>(c % k), c /= k;
    double cost = 0.0;
    for (int b = 0; b < k; ++b) {
      double wsum = 0.0, mean = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        if (lab[i] == b) wsum += a.weights[i], mean += a.weights[i] * a.points[i].values()[0];
      if (wsum == 0.0) continue;
      mean /= wsum;
      if (m.is_euclidean_kmeans()) {
        for (std::size_t i = 0; i < n; ++i)
          if (lab[i] == b) cost += a.weights[i] * std::pow(a.points[i].values()[0] - mean, 2);
      } else {
        double bc = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < n; ++j) {
          double cc = 0.0;
          for (std::size_t i = 0; i < n; ++i)
            if (lab[i] == b) cc += a.weights[i] * m(a.points[i], a.points[j]);
          bc = std::min(bc, cc);
        }
        cost += bc;
      }
    }
    best = std::min(best, cost);
  }
  return best;
}

}  // namespace

TEST(ExactPartition, SpecExamples) {
  const auto km = CostModel::kmeans();
  EXPECT_EQ(exact_partition(km, line({0, 1}), 2).cost, 0.0);

  const auto s = exact_partition(km, line({0, 0, 0, 1}), 1);
  ASSERT_EQ(s.centers.size(), 1u);
  EXPECT_DOUBLE_EQ(s.centers[0].values()[0], 0.25);
  EXPECT_DOUBLE_EQ(s.cost, 3 * 0.0625 + 0.5625);

  const auto h = exact_partition(km, line({0, 1}), 1);
  EXPECT_DOUBLE_EQ(h.centers[0].values()[0], 0.5);
  EXPECT_DOUBLE_EQ(h.cost, 0.5);
}

TEST(ExactPartition, Guards) {
  std::vector<double> xs(13);
  for (int i = 0; i < 13; ++i) xs[i] = i;
  EXPECT_THROW(exact_partition(CostModel::kmeans(), line(xs), 2), DomainError);
  EXPECT_THROW(exact_partition(CostModel::kmeans(), line({0, 1}), 4), DomainError);
  EXPECT_THROW(exact_partition(CostModel::kmeans(), WeightedSet{}, 1), DomainError);
}

TEST(ExactPartition, MatchesIndependentBruteForce) {
  Rng rng(77);
  for (int t = 0; t < 30; ++t) {
    const int n = 3 + static_cast<int>(rng.below(5));
    const int k = 1 + static_cast<int>(rng.below(3));
    std::vector<double> xs(n), ws(n);
    for (int i = 0; i < n; ++i) xs[i] = std::round(rng.normal() * 10) / 2, ws[i] = 0.5 + rng.uniform();
    const WeightedSet a = line(xs, ws);
    for (const auto& m : {CostModel::kmeans(), CostModel::kmedian(), CostModel::huber(1.0)}) {
      const double oracle = brute_force_opt(m, a, k);
      const Solution s = exact_partition(m, a, k);
      EXPECT_NEAR(s.cost, oracle, 1e-9 * std::max(1.0, oracle)) << m.name() << " n=" << n << " k=" << k;
      EXPECT_NEAR(s.cost, bar_cost(m, a, s.centers), 1e-9 * std::max(1.0, s.cost));
    }
  }
}

TEST(WeightedLloyd, SingleCenterIsWeightedCentroid) {
  const WeightedSet a({Point::dense(0, {0, 0}), Point::dense(1, {4, 0}), Point::dense(2, {0, 8})}, {1, 3, 4});
  Rng rng(1);
  const Solution s = weighted_lloyd(CostModel::kmeans(), a, 1, 1, rng);
  ASSERT_EQ(s.centers.size(), 1u);
  EXPECT_NEAR(s.centers[0].values()[0], 12.0 / 8.0, 1e-12);
  EXPECT_NEAR(s.centers[0].values()[1], 32.0 / 8.0, 1e-12);
  EXPECT_NEAR(s.cost, bar_cost(CostModel::kmeans(), a, s.centers), 1e-9);
}

TEST(WeightedLloyd, CostTraceNonIncreasing) {
  const auto data = gaussian_mixture({2000, 2, 4, 10.0, 1.0}, Rng(3));
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(seed);
    const Solution s = weighted_lloyd(CostModel::kmeans(), data, 4, 20, rng);
    ASSERT_FALSE(s.trace.empty());
    for (std::size_t r = 1; r < s.trace.size(); ++r) EXPECT_LE(s.trace[r], s.trace[r - 1] * (1 + 1e-12));
    EXPECT_NEAR(s.cost, bar_cost(CostModel::kmeans(), data, s.centers), 1e-9 * s.cost);
  }
}

TEST(WeightedLloyd, MoreCentersThanLocations) {
  Rng rng(2);
  const Solution s = weighted_lloyd(CostModel::kmeans(), line({1, 1, 2}), 5, 3, rng);
  EXPECT_EQ(s.cost, 0.0);
  EXPECT_EQ(s.centers.size(), 2u);
  EXPECT_THROW(weighted_lloyd(CostModel::kmedian(), line({1, 2}), 1, 3, rng), DomainError);
}

// 12-point subsample of the 4-Gaussian instance.
TEST(WeightedLloyd, WithinFactorOfExactOnSubsample) {
  const auto data = gaussian_mixture({2000, 2, 4, 10.0, 1.0}, Rng(8));
  WeightedSet sub;
  for (int i = 0; i < 12; ++i) sub.push_back(data.points[static_cast<std::size_t>(i) * 150], 1.0);
  const double exact = exact_partition(CostModel::kmeans(), sub, 3).cost;
  int ok = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    ok += weighted_lloyd(CostModel::kmeans(), sub, 3, 25, rng).cost <= 1.2 * exact + 1e-9 ? 1 : 0;
  }
  EXPECT_GE(ok, 18);
}

TEST(MedoidSwap, KEqualsSizeIsFree) {
  Rng rng(1);
  EXPECT_EQ(medoid_swap(CostModel::kmedian(), line({0, 3, 9}), 3, 10, rng).cost, 0.0);
}

TEST(MedoidSwap, LocalOptimalityAndOracleBound) {
  Rng gen(21);
  for (int t = 0; t < 25; ++t) {
    std::vector<double> xs(10), ws(10);
    for (int i = 0; i < 10; ++i) xs[i] = gen.normal() * 5, ws[i] = 0.2 + gen.uniform();
    const WeightedSet a = line(xs, ws);
    const auto m = CostModel::kmedian();
    Rng rng(static_cast<std::uint64_t>(t));
    const Solution s = medoid_swap(m, a, 2, 1000, rng);
    EXPECT_TRUE(s.locally_optimal);
    EXPECT_LE(s.cost, 5.0 * exact_partition(m, a, 2).cost + 1e-9);
    // No single swap improves.
    for (std::size_t out = 0; out < s.centers.size(); ++out)
      for (const auto& cand : a.points) {
        auto c = s.centers;
        c[out] = cand;
        EXPECT_GE(bar_cost(m, a, c), s.cost * (1 - 1e-9));
      }
  }
}

TEST(Solvers, WeightSplitInvariance) {
  Rng gen(6);
  std::vector<double> xs(8), ws(8);
  for (int i = 0; i < 8; ++i) xs[i] = gen.normal() * 4, ws[i] = 1.0 + gen.uniform();
  const WeightedSet a = line(xs, ws);
  WeightedSet split = a;
  split.weights[3] /= 2;
  Point twin = a.points[3];
  twin.set_id(100);
  split.push_back(twin, split.weights[3]);
  for (const auto& m : {CostModel::kmeans(), CostModel::kmedian()}) {
    EXPECT_NEAR(exact_partition(m, a, 2).cost, exact_partition(m, split, 2).cost, 1e-9);
    Rng r1(4), r2(4);
    const auto s1 = solve(m, a, 2, r1), s2 = solve(m, split, 2, r2);
    EXPECT_NEAR(bar_cost(m, a, s1.centers), bar_cost(m, split, s1.centers), 1e-9);
    EXPECT_NEAR(bar_cost(m, a, s2.centers), bar_cost(m, split, s2.centers), 1e-9);
  }
}

TEST(Solvers, ExactNoWorseThanOthers) {
  Rng gen(12);
  for (int t = 0; t < 20; ++t) {
    std::vector<double> xs(9);
    for (auto& x : xs) x = gen.normal() * 6;
    const WeightedSet a = line(xs);
    for (const auto& m : {CostModel::kmeans(), CostModel::kmedian()}) {
      Rng rng(static_cast<std::uint64_t>(t));
      EXPECT_LE(exact_partition(m, a, 3).cost, solve(m, a, 3, rng).cost * (1 + 1e-9) + 1e-12);
    }
  }
}
