#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "coreset/metric.hpp"
#include "coreset/rng.hpp"
#include "coreset/weighted_set.hpp"

using namespace coreset;

namespace {

WeightedSet line(const std::vector<double>& xs, const std::vector<double>& w = {}) {
  WeightedSet s;
  for (std::size_t i = 0; i < xs.size(); ++i)
    s.push_back(Point::dense(static_cast<PointId>(i), {xs[i]}), w.empty() ? 1.0 : w[i]);
  return s;
}

std::vector<std::vector<Point>> dense_grid(double lo, double hi, double step) {
  std::vector<std::vector<Point>> out;
  const auto n = static_cast<long>(std::llround((hi - lo) / step));
  for (long i = 0; i <= n; ++i) out.push_back({Point::dense(-1, {lo + step * static_cast<double>(i)})});
  return out;
}

}  // namespace

TEST(WeightedSet, RejectsNegativeWeightAndDuplicateIds) {
  EXPECT_THROW(WeightedSet({Point::dense(0, {1})}, {-1.0}), DomainError);
  EXPECT_THROW(WeightedSet({Point::dense(0, {1}), Point::dense(0, {2})}, {1.0, 1.0}), DomainError);
  EXPECT_THROW(WeightedSet({Point::dense(0, {1})}, {1.0, 2.0}), DomainError);
  EXPECT_THROW(WeightedSet({Point::dense(0, {1})}, {std::nan("")}), DomainError);
  EXPECT_NO_THROW(WeightedSet({Point::dense(0, {1}), Point::dense(1, {2})}, {0.0, 3.0}));
}

TEST(BarCost, Examples) {
  const auto km = CostModel::kmeans();
  EXPECT_DOUBLE_EQ(bar_cost(km, line({0, 1}), std::vector<Point>{Point::dense(-1, {0})}), 1.0);
  EXPECT_DOUBLE_EQ(bar_cost(km, line({0, 0, 0, 1}), std::vector<Point>{Point::dense(-1, {0})}), 1.0);
  const WeightedSet a = line({-2, 0.5, 3});
  EXPECT_EQ(bar_cost(km, a, a.points), 0.0);
  EXPECT_THROW(bar_cost(km, a, std::vector<Point>{}), DomainError);
}

TEST(BarCost, LinearInWeights) {
  Rng rng(3);
  WeightedSet a, b;
  for (int i = 0; i < 30; ++i) {
    const Point p = Point::dense(i, {rng.normal(), rng.normal()});
    const double w = rng.uniform();
    a.push_back(p, w);
    b.push_back(p, 2.0 * w);
  }
  const std::vector<Point> c{Point::dense(-1, {0.3, 0.1}), Point::dense(-2, {-1, 2})};
  for (const auto& m : {CostModel::kmeans(), CostModel::kmedian(), CostModel::huber(0.7)})
    EXPECT_NEAR(bar_cost(m, b, c), 2.0 * bar_cost(m, a, c), 1e-12 * bar_cost(m, b, c));
}

TEST(NuDistance, Examples) {
  EXPECT_EQ(nu_distance(7, 7, 0.25), 0.0);
  EXPECT_DOUBLE_EQ(nu_distance(1, 0, 0.25), 0.8);
  EXPECT_DOUBLE_EQ(nu_distance(2.0 * 1, 2.0 * 0, 1.0), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(nu_distance(1, 0, 1.0 / 2.0), nu_distance(2, 0, 1.0));
  EXPECT_THROW(nu_distance(1, 0, 0.0), DomainError);
  EXPECT_THROW(nu_distance(-1, 0, 1.0), DomainError);
}

TEST(NuDistance, ScalingIdentityOnSamples) {
  Rng rng(9);
  for (int i = 0; i < 1000; ++i) {
    const double a = rng.uniform() * 10, b = rng.uniform() * 10, nu = 0.01 + rng.uniform(), t = 0.1 + 5 * rng.uniform();
    EXPECT_NEAR(nu_distance(t * a, t * b, nu), nu_distance(a, b, nu / t), 1e-12);
  }
}

TEST(NuDistance, RangeAndCorollaryBound) {
  Rng rng(10);
  for (int i = 0; i < 20000; ++i) {
    const double a = rng.uniform(), b = rng.uniform(), eps = rng.uniform();
    const double d = nu_distance(a, b, 0.25);
    ASSERT_GE(d, 0.0);
    ASSERT_LT(d, 1.0);
    if (d <= eps / 4.0) {
      ASSERT_LE(std::abs(a - b), eps);
    }
  }
}

// Grid oracle: max over c of c^2 / (c^2 + (1-c)^2) is 1, attained at c = 1.
TEST(BruteSensitivity, TwoPointKmeans) {
  const auto s = brute_sensitivity(CostModel::kmeans(), line({0, 1}), 1, dense_grid(-10, 10, 1e-3));
  EXPECT_NEAR(s.s[0], 1.0, 1e-9);
  EXPECT_NEAR(s.s[1], 1.0, 1e-9);
  EXPECT_NEAR(s.total, 2.0, 1e-9);
}

// Grid oracle: the point at 1 reaches 1 (query at 0); a 0-point reaches max of
// c^2 / (4c^2 - 2c + 1) = 1/3 at c = 1.
TEST(BruteSensitivity, ThreeZerosAndAOne) {
  const auto s = brute_sensitivity(CostModel::kmeans(), line({0, 0, 0, 1}), 1, dense_grid(-10, 10, 1e-3));
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(s.s[i], 1.0 / 3.0, 1e-9);
  EXPECT_NEAR(s.s[3], 1.0, 1e-9);
  EXPECT_NEAR(s.total, 2.0, 1e-9);
}

TEST(BruteSensitivity, SinglePointIsOne) {
  const auto s = brute_sensitivity(CostModel::kmedian(), line({4.0}), 1, dense_grid(-3, 3, 0.5));
  EXPECT_DOUBLE_EQ(s.s[0], 1.0);
  EXPECT_DOUBLE_EQ(s.total, 1.0);
}

TEST(BruteSensitivity, RangeAndMonotoneInCandidates) {
  Rng rng(4);
  WeightedSet p;
  for (int i = 0; i < 20; ++i) p.push_back(Point::dense(i, {rng.normal() * 3}), 0.5 + rng.uniform());
  const auto coarse = dense_grid(-10, 10, 1.0);
  auto fine = coarse;
  for (const auto& q : dense_grid(-10, 10, 0.1)) fine.push_back(q);
  const auto a = brute_sensitivity(CostModel::kmedian(), p, 1, coarse);
  const auto b = brute_sensitivity(CostModel::kmedian(), p, 1, fine);
  for (std::size_t i = 0; i < p.size(); ++i) {
    EXPECT_GT(a.s[i], 0.0);
    EXPECT_LE(b.s[i], 1.0);
    EXPECT_GE(b.s[i], a.s[i]);
  }
}

TEST(BruteSensitivity, ZeroCostCandidatesOnly) {
  const WeightedSet p = line({2.0, 2.0});
  EXPECT_THROW(brute_sensitivity(CostModel::kmeans(), p, 1, {{Point::dense(-1, {2.0})}}), DomainError);
  EXPECT_THROW(brute_sensitivity(CostModel::kmeans(), p, 1, {}), DomainError);
}

TEST(SampleSize, NaturalLogExample) {
  // ceil((10 / 0.25) * (10 ln 10 + ln 2))
  EXPECT_EQ(sample_size(10.0, QuerySpec(10, 1), 0.5, 0.5, 1.0), 949);
  EXPECT_EQ(sample_size(10.0, QuerySpec(5, 2), 0.5, 0.5, 1.0), 949);
  const double oracle = std::ceil(40.0 * (10.0 * std::log(10.0) + std::log(2.0)));
  EXPECT_EQ(sample_size(10.0, QuerySpec(1, 10), 0.5, 0.5, 1.0), static_cast<long long>(oracle));
}

TEST(SampleSize, RejectsIllegalEpsAndDelta) {
  EXPECT_THROW(sample_size(10.0, QuerySpec(1, 1), 1.0, 0.5, 1.0), DomainError);
  EXPECT_THROW(sample_size(10.0, QuerySpec(1, 1), 0.5, 0.0, 1.0), DomainError);
  EXPECT_THROW(sample_size(0.0, QuerySpec(1, 1), 0.5, 0.5, 1.0), DomainError);
  EXPECT_THROW(sample_size(10.0, QuerySpec(1, 1), 0.5, 0.5, 0.0), DomainError);
  EXPECT_THROW(QuerySpec(0, 1), DomainError);
}

TEST(SampleSize, DoublingTAtLeastDoubles) {
  for (double t = 3.0; t < 5000.0; t *= 1.37)
    for (int dk : {1, 4, 30})
      EXPECT_GE(sample_size(2 * t, QuerySpec(dk, 1), 0.3, 0.1, 1.0), 2 * sample_size(t, QuerySpec(dk, 1), 0.3, 0.1, 1.0) - 1)
          << "t=" << t;
}

TEST(SampleSize, SmallTClampsLog) {
  const double oracle = std::ceil(0.5 / 0.25 * (std::log(2.0) + std::log(2.0)));
  EXPECT_EQ(sample_size(0.5, QuerySpec(1, 1), 0.5, 0.5, 1.0), static_cast<long long>(oracle));
}

TEST(SampleSize, NearLinearVariant) {
  const double t = 12.0, beta = 3.0;
  const double oracle = std::ceil(2.0 * 4.0 * (t + beta) / 0.04 * (5.0 * std::log(t) + std::log(beta * 4.0) + std::log(10.0)));
  EXPECT_EQ(sample_size(t, QuerySpec(4, 5), 0.2, 0.1, 2.0, SampleBound::near_linear_in_k, beta),
            static_cast<long long>(oracle));
}
