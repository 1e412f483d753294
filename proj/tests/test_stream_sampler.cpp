#include <cmath>
#include <map>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "coreset/harness.hpp"
#include "coreset/stream_sampler.hpp"
#include "coreset/streaming.hpp"

using namespace coreset;

namespace {

// Drives a bicriterion and any number of samplers over `data`.
template <class F>
void drive(const WeightedSet& data, StreamBicriterion& bic, F&& per_point) {
  std::vector<Point> first;
  std::size_t i = 0;
  for (; i < data.size() && static_cast<int>(first.size()) < bic.init_size(); ++i) {
    bool dup = false;
    for (const auto& q : first) dup = dup || q.same_location(data.points[i]);
    if (!dup) first.push_back(data.points[i]);
  }
  bic.init(first);
  for (std::size_t j = 0; j < data.size(); ++j) {
    const UpdateResult r = bic.update(data.points[j], data.weights[j]);
    per_point(j, r);
  }
}

}  // namespace

TEST(SamplerParams, ScaleAndTotalSensitivity) {
  const auto p = SamplerParams::sensitivity_schedule(3, 1000, 0.2, 0.1, 1.0, 2.0, 10.0);
  EXPECT_DOUBLE_EQ(p.t_prime, 2.0 * 10.0 + 4.0 * 11.0 * 3.0);
  const double oracle = 2.0 / 0.04 * (std::log(1000.0) * std::log(p.t_prime) + std::log(10.0));
  EXPECT_NEAR(p.x_scale, oracle, 1e-9 * oracle);
  EXPECT_GE(p.inflated_t_prime(), p.t_prime);
  EXPECT_DOUBLE_EQ(p.inflated_t_prime(), 2.0 * 10.0 * 1.2 / 0.8 + 4.0 * 11.0 * 3.0);
  EXPECT_THROW(SamplerParams::sensitivity_schedule(3, 1000, 1.2, 0.1, 1.0, 2.0, 10.0), DomainError);
  EXPECT_THROW(SamplerParams::sensitivity_schedule(3, 1000, 0.2, 0.1, 0.0, 2.0, 10.0), DomainError);
  const auto a = SamplerParams::algorithm1_schedule(3, 1000, 0.2, 0.1, 2.0, 50.0);
  EXPECT_EQ(a.t_prime, 1.0);
  EXPECT_EQ(a.x_scale, 50.0);
  EXPECT_EQ(a.inflated_t_prime(), 1.0);
  EXPECT_THROW(parse_schedule("other"), DomainError);
  EXPECT_EQ(parse_schedule(to_string(Schedule::algorithm1)), Schedule::algorithm1);
}

// Retention frequency against min(1, m pr_final), with pr_final rebuilt from the
// recorded B(x) and D(x, B(x)) by the offline formula.
TEST(ThresholdSampler, Algorithm1RetentionMatchesOfflineProbability) {
  const auto data = gaussian_mixture({30, 2, 3, 10.0, 1.0}, Rng(3));
  const auto m = CostModel::kmeans();
  const auto bp = BicriterionParams::defaults(m, 2, 30, 0.2);
  std::vector<UpdateResult> rec;
  {
    StreamBicriterion bic(m, bp, Rng(11));
    drive(data, bic, [&](std::size_t, const UpdateResult& r) { rec.push_back(r); });
  }
  std::map<PointId, double> cluster;
  double cost = 0.0;
  for (std::size_t i = 0; i < rec.size(); ++i) cluster[rec[i].center] += 1.0, cost += rec[i].dist;
  std::vector<double> pr(rec.size());
  for (std::size_t i = 0; i < rec.size(); ++i) {
    const double u = 1.0 / (static_cast<double>(cluster.size()) * cluster[rec[i].center]);
    pr[i] = cost > 0.0 ? 0.5 * rec[i].dist / cost + 0.5 * u : u;
  }

  const double budget = 6.0;
  const auto sp = SamplerParams::algorithm1_schedule(2, 30, 0.2, 0.1, 2.0, budget);
  const int runs = 4000;
  std::vector<int> hits(rec.size(), 0);
  for (int s = 0; s < runs; ++s) {
    ThresholdSampler sampler(m, sp, Rng(1000 + static_cast<std::uint64_t>(s)));
    StreamBicriterion bic(m, bp, Rng(11));
    drive(data, bic, [&](std::size_t j, const UpdateResult& r) { sampler.ingest(data.points[j], 1.0, r, bic); });
    for (const auto& q : sampler.retained()) ++hits[static_cast<std::size_t>(q.point.id())];
  }
  for (std::size_t i = 0; i < rec.size(); ++i) {
    const double p = std::min(1.0, budget * pr[i]);
    const double se = std::sqrt(std::max(p * (1 - p), 1e-12) / runs);
    EXPECT_NEAR(hits[i] / static_cast<double>(runs), p, 4 * se + 1e-12) << "point " << i;
  }
}

TEST(ThresholdSampler, DeletedPointsNeverReturnAndBoundsOnlyShrink) {
  const auto data = gaussian_mixture({3000, 2, 4, 10.0, 1.0}, Rng(5));
  const auto m = CostModel::kmeans();
  StreamBicriterion bic(m, BicriterionParams::defaults(m, 3, 3000, 0.2), Rng(6));
  auto sp = SamplerParams::sensitivity_schedule(3, 3000, 0.2, 0.1, 2e-4, 2.0, 200.0);
  ThresholdSampler sampler(m, sp, Rng(7));
  std::set<PointId> deleted;
  std::map<PointId, double> last_s;
  drive(data, bic, [&](std::size_t j, const UpdateResult& r) {
    std::set<PointId> before;
    for (const auto& q : sampler.retained()) before.insert(q.point.id());
    sampler.ingest(data.points[j], 1.0, r, bic);
    std::set<PointId> after;
    for (const auto& q : sampler.retained()) {
      after.insert(q.point.id());
      ASSERT_EQ(deleted.count(q.point.id()), 0u);
      auto it = last_s.find(q.point.id());
      if (it != last_s.end()) {
        ASSERT_LE(q.s, it->second);
      }
      last_s[q.point.id()] = q.s;
      ASSERT_LE(q.threshold, sampler.params().x_scale * q.s);
      ASSERT_LE(q.s, 1.0);
    }
    for (auto id : before)
      if (!after.count(id)) deleted.insert(id);
  });
  EXPECT_GT(deleted.size(), 0u);
  EXPECT_GT(sampler.size(), 0u);
  EXPECT_GE(sampler.peak(), sampler.size());
}

TEST(ThresholdSampler, EmitConservesWeightAndOrdersByBound) {
  const auto data = gaussian_mixture({2000, 2, 4, 10.0, 1.0}, Rng(8));
  const auto m = CostModel::kmeans();
  StreamBicriterion bic(m, BicriterionParams::defaults(m, 3, 2000, 0.2), Rng(9));
  ThresholdSampler sampler(m, SamplerParams::sensitivity_schedule(3, 2000, 0.2, 0.1, 2e-4, 2.0, 200.0), Rng(10));
  drive(data, bic, [&](std::size_t j, const UpdateResult& r) { sampler.ingest(data.points[j], 1.0, r, bic); });
  const auto out = sampler.emit();
  EXPECT_NEAR(out.set.total_weight(), 2000.0, 1e-9 * 2000);
  EXPECT_EQ(sampler.weight_seen(), 2000.0);
  EXPECT_EQ(sampler.points_seen(), 2000);
  // Unit input weights: emitted weight is inversely proportional to the inclusion probability.
  const auto& ret = sampler.retained();
  for (std::size_t a = 0; a < ret.size(); ++a)
    for (std::size_t b = a + 1; b < std::min(ret.size(), a + 20); ++b) {
      const double lhs = out.set.weights[a] * sampler.inclusion(ret[a].s);
      const double rhs = out.set.weights[b] * sampler.inclusion(ret[b].s);
      EXPECT_NEAR(lhs, rhs, 1e-9 * lhs);
    }
}

TEST(ThresholdSampler, EmptyEmitThrows) {
  ThresholdSampler sampler(CostModel::kmeans(), SamplerParams{}, Rng(1));
  EXPECT_THROW(static_cast<void>(sampler.emit()), DomainError);
}

// Single retained point carries the whole weight.
TEST(ThresholdSampler, SinglePointEmitsTotalWeight) {
  const auto m = CostModel::kmedian();
  StreamBicriterion bic(m, BicriterionParams::defaults(m, 1, 2, 0.2), Rng(1));
  bic.init({Point::dense(0, {0.0}), Point::dense(1, {1.0})});
  ThresholdSampler sampler(m, SamplerParams::algorithm1_schedule(1, 2, 0.2, 0.1, 1.0, 5.0), Rng(2));
  const Point x = Point::dense(0, {0.0});
  sampler.ingest(x, 3.5, bic.update(x, 3.5), bic);
  const auto out = sampler.emit();
  ASSERT_EQ(out.set.size(), 1u);
  EXPECT_DOUBLE_EQ(out.set.weights[0], 3.5);
}

TEST(ThresholdSampler, LowerBoundEstimateRarelyExceedsCost) {
  const auto data = gaussian_mixture({5000, 2, 4, 10.0, 1.0}, Rng(12));
  const auto m = CostModel::kmeans();
  StreamBicriterion bic(m, BicriterionParams::defaults(m, 4, 5000, 0.2), Rng(13));
  ThresholdSampler sampler(m, SamplerParams::sensitivity_schedule(4, 5000, 0.2, 0.1, 1e-3, 2.0, 936.0), Rng(14));
  int checked = 0, ok = 0;
  drive(data, bic, [&](std::size_t j, const UpdateResult& r) {
    sampler.ingest(data.points[j], 1.0, r, bic);
    if (j % 250 != 249) return;
    WeightedSet prefix;
    for (std::size_t i = 0; i <= j; ++i) prefix.push_back(data.points[i], 1.0);
    const double cost = bar_cost(m, prefix, sampler.approx_centers());
    ++checked;
    ok += sampler.last_lower_bound() <= cost * (1 + 1e-9) ? 1 : 0;
  });
  EXPECT_GE(ok, checked * 9 / 10);
}

TEST(ThresholdSampler, Algorithm1ExpectedSizeWithinBudget) {
  const auto data = gaussian_mixture({1500, 2, 4, 10.0, 1.0}, Rng(15));
  const auto m = CostModel::kmeans();
  const double budget = 80.0;
  double mean = 0.0;
  const int runs = 40;
  for (int s = 0; s < runs; ++s) {
    StreamBicriterion bic(m, BicriterionParams::defaults(m, 3, 1500, 0.2), Rng(16));
    ThresholdSampler sampler(m, SamplerParams::algorithm1_schedule(3, 1500, 0.2, 0.1, 2.0, budget),
                             Rng(100 + static_cast<std::uint64_t>(s)));
    drive(data, bic, [&](std::size_t j, const UpdateResult& r) { sampler.ingest(data.points[j], 1.0, r, bic); });
    mean += static_cast<double>(sampler.size()) / runs;
  }
  // Sum of min(1, m pr) over a distribution is at most m; allow 3 SE of a Poisson count.
  EXPECT_LE(mean, budget + 3.0 * std::sqrt(budget / runs));
}

TEST(Assemble, UnionAndPhaseCheck) {
  Snapshot snap;
  snap.phase = 2;
  snap.summary.push_back(Point::dense(100, {1.0}), 4.0);
  CoresetSample s;
  s.set.push_back(Point::dense(7, {2.0}), 1.5);
  s.m = 1;
  const auto out = assemble(&snap, 3, &s);
  ASSERT_EQ(out.set.size(), 2u);
  EXPECT_DOUBLE_EQ(out.set.total_weight(), 5.5);
  EXPECT_EQ(out.provenance, Provenance::streaming);
  EXPECT_THROW(assemble(&snap, 2, &s), DomainError);
  EXPECT_THROW(assemble(nullptr, 2, &s), DomainError);
  EXPECT_EQ(assemble(nullptr, 1, &s).set.size(), 1u);
  EXPECT_EQ(assemble(&snap, 3, nullptr).set.size(), 1u);
}

TEST(StreamingCoreset, BuffersUntilEnoughDistinctPoints) {
  StreamConfig cfg;
  cfg.k = 3;
  StreamingCoreset sc(CostModel::kmeans(), cfg, Rng(1));
  EXPECT_THROW(static_cast<void>(sc.coreset()), DomainError);
  sc.insert(Point::dense(0, {1.0}), 1.0);
  sc.insert(Point::dense(1, {1.0}), 2.0);
  sc.insert(Point::dense(2, {3.0}), 1.0);
  EXPECT_TRUE(sc.degenerate());
  const auto out = sc.coreset();
  EXPECT_EQ(out.set.size(), 3u);
  EXPECT_DOUBLE_EQ(out.set.total_weight(), 4.0);
  sc.insert(Point::dense(3, {5.0}), 1.0);
  EXPECT_FALSE(sc.degenerate());
  EXPECT_NEAR(sc.coreset().set.total_weight(), 5.0, 1e-12);
}

class StreamingSchedules : public ::testing::TestWithParam<Schedule> {};

TEST_P(StreamingSchedules, WeightConservedAndPeakWithinPrediction) {
  const auto data = gaussian_mixture({4000, 2, 4, 10.0, 1.0}, Rng(20));
  StreamConfig cfg;
  cfg.k = 3;
  cfg.n = 4000;
  cfg.c_const = 2e-4;
  cfg.schedule = GetParam();
  if (cfg.schedule == Schedule::algorithm1) cfg.sample_budget = 150.0;
  StreamingCoreset sc(CostModel::kmeans(), cfg, Rng(21));
  for (std::size_t i = 0; i < data.size(); ++i) {
    sc.insert(data.points[i], 1.0);
    if (i % 500 == 499) {
      const auto out = sc.coreset();
      if (cfg.schedule == Schedule::sensitivity) {
        EXPECT_NEAR(out.set.total_weight(), static_cast<double>(i + 1), 1e-9 * i);
      }
      out.set.validate();
    }
  }
  EXPECT_LE(static_cast<double>(sc.peak_stored()), sc.predicted_budget());
  EXPECT_LE(static_cast<int>(sc.samplers().size()), sc.bicriterion().params().lambda);
  const auto out = sc.coreset();
  EXPECT_LT(out.set.size(), data.size());
}

INSTANTIATE_TEST_SUITE_P(Both, StreamingSchedules, ::testing::Values(Schedule::sensitivity, Schedule::algorithm1));

TEST(StreamingCoreset, Algorithm1CoresetUsesSnapshotPlusSample) {
  // Spread grows along the stream so that many phases complete.
  WeightedSet data;
  Rng gen(22);
  for (int i = 0; i < 6000; ++i) {
    const double scale = std::pow(1.002, i);
    data.push_back(Point::dense(i, {scale * gen.normal(), scale * gen.normal()}), 1.0);
  }
  StreamConfig cfg;
  cfg.k = 2;
  cfg.n = 6000;
  cfg.schedule = Schedule::algorithm1;
  cfg.sample_budget = 100.0;
  StreamingCoreset sc(CostModel::kmeans(), cfg, Rng(23));
  for (std::size_t i = 0; i < data.size(); ++i) sc.insert(data.points[i], 1.0);
  const auto& bic = sc.bicriterion();
  const int j = bic.phase() - bic.params().lambda;
  ASSERT_GE(j, 1) << "stream too short to exercise snapshots";
  const auto out = sc.coreset();
  const Snapshot* snap = bic.snapshot(j);
  ASSERT_NE(snap, nullptr);
  ASSERT_GE(out.set.size(), snap->summary.size());
  for (std::size_t i = 0; i < snap->summary.size(); ++i) EXPECT_EQ(out.set.points[i].id(), snap->summary.points[i].id());
  EXPECT_EQ(sc.samplers().front().params().start_phase, j + 1);
}

TEST(StreamingCoreset, RefreshEveryPointKeepsInvariants) {
  const auto data = gaussian_mixture({800, 2, 3, 10.0, 1.0}, Rng(24));
  for (bool literal : {false, true}) {
    StreamConfig cfg;
    cfg.k = 3;
    cfg.n = 800;
    cfg.c_const = 1e-3;
    cfg.refresh_every_point = true;
    cfg.literal_l_line = literal;
    StreamingCoreset sc(CostModel::kmeans(), cfg, Rng(25));
    for (std::size_t i = 0; i < data.size(); ++i) sc.insert(data.points[i], 1.0);
    const auto out = sc.coreset();
    EXPECT_NEAR(out.set.total_weight(), 800.0, 1e-9 * 800);
    EXPECT_TRUE(sc.sensitivity_params().refresh_every_point);
    EXPECT_LE(sc.samplers().front().approx_centers().size(), 3u);
  }
}

TEST(StreamingCoreset, NonEuclideanModelUsesSeeding) {
  const auto data = gaussian_mixture({1500, 2, 3, 10.0, 1.0}, Rng(26));
  StreamConfig cfg;
  cfg.k = 3;
  cfg.n = 1500;
  cfg.c_const = 1e-3;
  StreamingCoreset sc(CostModel::kmedian(), cfg, Rng(27));
  for (std::size_t i = 0; i < data.size(); ++i) sc.insert(data.points[i], 1.0);
  const auto out = sc.coreset();
  EXPECT_NEAR(out.set.total_weight(), 1500.0, 1e-9 * 1500);
  for (const auto& c : sc.samplers().front().approx_centers()) EXPECT_GE(c.id(), 0);
}
