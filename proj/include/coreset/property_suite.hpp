#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "coreset/bicriterion.hpp"
#include "coreset/coreset.hpp"
#include "coreset/merge_reduce.hpp"
#include "coreset/metric.hpp"
#include "coreset/rng.hpp"
#include "coreset/solvers.hpp"
#include "coreset/stream_bicriterion.hpp"
#include "coreset/stream_sampler.hpp"
#include "coreset/weighted_set.hpp"

namespace coreset {

// ---------------------------------------------------------------- oracle helpers

/// Every shipped cost model with representative parameters.
inline std::vector<CostModel> shipped_models() {
  return {CostModel::kmedian(), CostModel::kmeans(),     CostModel::lp(3.0),
          CostModel::huber(1.0), CostModel::cauchy(1.0), CostModel::tukey(2.0)};
}

/// Relaxed triangle inequality D(x,z) <= rho (D(x,y) + D(y,z)), with slack.
inline bool rho_triangle_holds(const CostModel& m, const Point& x, const Point& y, const Point& z) {
  const double a = m(x, z);
  const double b = m.rho() * (m(x, y) + m(y, z));
  return a <= b + 1e-9 * std::max(1.0, std::max(a, b));
}

/// |D(x,z) - D(y,z)| <= psi D(x,y) + eps D(y,z), with psi = (r/eps)^r.
inline bool psi_eps_holds(const CostModel& m, double eps, const Point& x, const Point& y, const Point& z) {
  const double dxz = m(x, z), dyz = m(y, z), dxy = m(x, y);
  const double lhs = std::abs(dxz - dyz);
  const double rhs = psi(m, eps) * dxy + eps * dyz;
  return lhs <= rhs + 1e-9 * std::max({1.0, dxz, dyz});
}

/// Random point with coordinates on a mixed scale (so both tiny and large
/// distances occur).
inline Point random_point(Rng& rng, PointId id, int dim) {
  const double scale = std::pow(10.0, 4.0 * rng.uniform() - 2.0);
  std::vector<double> x(static_cast<std::size_t>(dim));
  for (auto& v : x) v = scale * rng.normal();
  return Point::dense(id, std::move(x));
}

/// Candidate center sets for the sensitivity oracle on 1-d or 2-d inputs: every
/// grid node (and every pair of grid nodes when k = 2) over the padded bounding box,
/// plus every input point and every pair of input points.
inline std::vector<std::vector<Point>> grid_queries(const WeightedSet& p, int k, int steps_1d = 400, int steps_2d = 20) {
  require(k == 1 || k == 2, "grid_queries: k must be 1 or 2");
  std::size_t dim = 1;
  for (const auto& q : p.points) dim = std::max(dim, q.dim());
  require(dim <= 2, "grid_queries: only 1-d and 2-d inputs");
  std::vector<double> lo(dim, std::numeric_limits<double>::infinity()), hi(dim, -std::numeric_limits<double>::infinity());
  for (const auto& q : p.points) {
    const auto x = q.to_dense(dim);
    for (std::size_t d = 0; d < dim; ++d) lo[d] = std::min(lo[d], x[d]), hi[d] = std::max(hi[d], x[d]);
  }
  std::vector<Point> nodes;
  PointId id = -1;
  const int steps = dim == 1 ? (k == 1 ? steps_1d : steps_1d / 4) : steps_2d;
  for (std::size_t d = 0; d < dim; ++d) {
    const double pad = std::max(1.0, hi[d] - lo[d]);
    lo[d] -= pad;
    hi[d] += pad;
  }
  if (dim == 1) {
    for (int i = 0; i <= steps; ++i) nodes.push_back(Point::dense(id--, {lo[0] + (hi[0] - lo[0]) * i / steps}));
  } else {
    for (int i = 0; i <= steps; ++i)
      for (int j = 0; j <= steps; ++j)
        nodes.push_back(Point::dense(id--, {lo[0] + (hi[0] - lo[0]) * i / steps, lo[1] + (hi[1] - lo[1]) * j / steps}));
  }
  for (const auto& q : p.points) nodes.push_back(q);
  std::vector<std::vector<Point>> out;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    out.push_back({nodes[i]});
    if (k == 2)
      for (std::size_t j = i + 1; j < nodes.size(); ++j) out.push_back({nodes[i], nodes[j]});
  }
  return out;
}

/// Smallest cost over a candidate list (an upper bound on OPT).
inline double best_candidate_cost(const CostModel& model, const WeightedSet& p,
                                  const std::vector<std::vector<Point>>& candidates) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& z : candidates) best = std::min(best, bar_cost(model, p, z));
  return best;
}

// ---------------------------------------------------------------- suite

struct PropertyOutcome {
  bool passed = true;
  std::string detail;
};

struct PropertyCase {
  std::string id;
  /// What the assertion encodes.
  std::string ref;
  /// Default instance size; shrinking halves it.
  int size = 64;
  int min_size = 2;
  std::function<PropertyOutcome(std::uint64_t seed, int size)> check;
};

namespace detail {

inline WeightedSet random_line(Rng& rng, int n, bool weighted) {
  WeightedSet p;
  for (int i = 0; i < n; ++i) {
    const double x = std::round(rng.normal() * 40.0) / 8.0;
    p.push_back(Point::dense(i, {x}), weighted ? 0.25 + 2.0 * rng.uniform() : 1.0);
  }
  return p;
}

inline WeightedSet random_plane(Rng& rng, int n) {
  WeightedSet p;
  for (int i = 0; i < n; ++i) {
    const double c = rng.below(3) * 6.0;
    p.push_back(Point::dense(i, {c + rng.normal(), rng.normal()}), 0.5 + rng.uniform());
  }
  return p;
}

inline PropertyOutcome fail(std::string msg) { return {false, std::move(msg)}; }

}  // namespace detail

/// Registered properties. Sizes are per-case instance sizes (triples, points, builds).
inline std::vector<PropertyCase> registered_properties() {
  std::vector<PropertyCase> cases;

  cases.push_back({"rho_triangle", "relaxed triangle inequality with rho = max(2^(r-1), 1)", 2000, 1,
                   [](std::uint64_t seed, int size) {
                     Rng rng(seed);
                     for (const auto& m : shipped_models())
                       for (int t = 0; t < size; ++t) {
                         const int dim = 1 + static_cast<int>(rng.below(3));
                         const Point x = random_point(rng, 0, dim), y = random_point(rng, 1, dim), z = random_point(rng, 2, dim);
                         if (!rho_triangle_holds(m, x, y, z)) return detail::fail(m.name() + " violates the rho-triangle");
                       }
                     return PropertyOutcome{};
                   }});

  cases.push_back({"psi_eps_metric", "(psi, eps) inequality with psi = (r/eps)^r", 2000, 1,
                   [](std::uint64_t seed, int size) {
                     Rng rng(seed);
                     for (const auto& m : shipped_models())
                       for (double eps : {0.1, 0.25, 0.5})
                         for (int t = 0; t < size / 3 + 1; ++t) {
                           const int dim = 1 + static_cast<int>(rng.below(3));
                           const Point x = random_point(rng, 0, dim), y = random_point(rng, 1, dim), z = random_point(rng, 2, dim);
                           if (!psi_eps_holds(m, eps, x, y, z))
                             return detail::fail(m.name() + " violates the (psi,eps) inequality at eps " + std::to_string(eps));
                         }
                     return PropertyOutcome{};
                   }});

  cases.push_back({"symmetry_and_monotone", "D symmetric, zero on the diagonal, transform monotone", 500, 1,
                   [](std::uint64_t seed, int size) {
                     Rng rng(seed);
                     for (const auto& m : shipped_models()) {
                       for (int t = 0; t < size; ++t) {
                         const Point x = random_point(rng, 0, 2), y = random_point(rng, 1, 2);
                         if (m(x, y) != m(y, x)) return detail::fail(m.name() + " is not symmetric");
                         if (m(x, x) != 0.0) return detail::fail(m.name() + " is nonzero on the diagonal");
                         const double a = std::abs(rng.normal()) * 5.0, b = a + std::abs(rng.normal()) * 5.0;
                         if (m.transform(a) > m.transform(b)) return detail::fail(m.name() + " transform is not monotone");
                         const double delta = 1.0 + 10.0 * rng.uniform();
                         const double lhs = m.transform(delta * a), rhs = std::pow(delta, m.lll_exponent()) * m.transform(a);
                         if (a > 0.0 && lhs > rhs * (1.0 + 1e-9)) return detail::fail(m.name() + " exceeds its growth exponent");
                       }
                     }
                     return PropertyOutcome{};
                   }});

  cases.push_back({"nu_distance", "|a-b|_nu lies in [0,1), and |a-b|_(1/4) <= eps/4 implies |a-b| <= eps on [0,1]", 5000, 1,
                   [](std::uint64_t seed, int size) {
                     Rng rng(seed);
                     for (int t = 0; t < size; ++t) {
                       const double a = rng.uniform(), b = rng.uniform() < 0.2 ? a : rng.uniform();
                       const double nu = 0.01 + rng.uniform();
                       const double d = nu_distance(a, b, nu);
                       if (!(d >= 0.0 && d < 1.0)) return detail::fail("nu_distance out of range");
                       if ((d == 0.0) != (a == b)) return detail::fail("nu_distance zero iff equal fails");
                       const double eps = rng.uniform();
                       if (nu_distance(a, b, 0.25) <= eps / 4.0 && std::abs(a - b) > eps)
                         return detail::fail("corollary bound fails");
                     }
                     return PropertyOutcome{};
                   }});

  cases.push_back({"sensitivity_domination", "s'(p) from an assignment dominates the grid-oracle sensitivity", 32, 2,
                   [](std::uint64_t seed, int size) {
                     Rng rng(seed);
                     const bool plane = rng.below(2) == 1;
                     const int k = 1 + static_cast<int>(rng.below(2));
                     const CostModel model = rng.below(2) == 0 ? CostModel::kmeans() : CostModel::kmedian();
                     const WeightedSet p = plane ? detail::random_plane(rng, size) : detail::random_line(rng, size, true);
                     const auto queries = grid_queries(p, k, 200, 12);
                     const double best = best_candidate_cost(model, p, queries);
                     if (!(best > 0.0)) return PropertyOutcome{};
                     const Solution sol = solve(model, p, k, rng);
                     const Assignment a = Assignment::nearest(model, p, sol.centers, k);
                     const double alpha = std::max(1.0, a.conn_cost / best);
                     const auto bound = sensitivity_from_assignment(p, a, model.rho(), alpha);
                     const auto truth = brute_sensitivity(model, p, k, queries);
                     for (std::size_t i = 0; i < p.size(); ++i)
                       if (bound.s[i] < truth.s[i] * (1.0 - 1e-9))
                         return detail::fail("point " + std::to_string(i) + ": bound " + std::to_string(bound.s[i]) +
                                             " < oracle " + std::to_string(truth.s[i]));
                     const double tp = total_sensitivity_bound(model.rho(), alpha, a.centers.size());
                     if (std::abs(bound.total - tp) > 1e-9 * tp) return detail::fail("t' does not match the closed form");
                     return PropertyOutcome{};
                   }});

  cases.push_back({"pr_normalized", "offline sampling distribution sums to one", 200, 2,
                   [](std::uint64_t seed, int size) {
                     Rng rng(seed);
                     const WeightedSet p = detail::random_plane(rng, size);
                     const Assignment a = dsquared_seed(CostModel::kmeans(), p, 2, 1, rng);
                     a.check(CostModel::kmeans(), p);
                     const auto pr = sampling_distribution(p, a);
                     double total = 0.0;
                     for (double v : pr) total += v;
                     if (std::abs(total - 1.0) > 1e-9) return detail::fail("sum of pr is " + std::to_string(total));
                     const CoresetSample s = build_coreset(p, a, 50, rng);
                     for (std::size_t j = 0; j < s.set.size(); ++j) {
                       const auto i = s.source[j];
                       const double u = static_cast<double>(s.draws[j]) * p.weights[i] / (50.0 * pr[i]);
                       if (std::abs(u - s.set.weights[j]) > 1e-12 * u) return detail::fail("coreset weight mismatch");
                     }
                     return PropertyOutcome{};
                   }});

  cases.push_back({"unbiased_estimator", "E[cost(S,u,C)] = cost(P,w,C) within 3 standard errors", 2000, 200,
                   [](std::uint64_t seed, int size) {
                     Rng rng(seed);
                     const WeightedSet p = detail::random_line(rng, 10, true);
                     const CostModel model = CostModel::kmeans();
                     const Assignment a = dsquared_seed(model, p, 1, 1, rng);
                     const std::vector<Point> c{Point::dense(-1, {rng.normal() * 3.0})};
                     const double truth = bar_cost(model, p, c);
                     double sum = 0.0, sq = 0.0;
                     for (int b = 0; b < size; ++b) {
                       const double v = bar_cost(model, build_coreset(p, a, 3, rng).set, c);
                       sum += v;
                       sq += v * v;
                     }
                     const double mean = sum / size;
                     const double se = std::sqrt(std::max(0.0, sq / size - mean * mean) / size);
                     if (std::abs(mean - truth) > 3.0 * se + 1e-12 * truth)
                       return detail::fail("mean " + std::to_string(mean) + " vs " + std::to_string(truth));
                     return PropertyOutcome{};
                   }});

  cases.push_back({"bicriterion_invariants", "geometric L, center budget, weight conservation, fixed B(x)", 600, 8,
                   [](std::uint64_t seed, int size) {
                     Rng rng(seed);
                     const CostModel model = rng.below(2) == 0 ? CostModel::kmeans() : CostModel::kmedian();
                     auto params = BicriterionParams::defaults(model, 2, size, 0.2);
                     params.record_moves = true;
                     StreamBicriterion bic(model, params, rng.split(1));
                     const WeightedSet p = detail::random_plane(rng, size);
                     std::vector<Point> first;
                     for (const auto& q : p.points) {
                       if (std::none_of(first.begin(), first.end(), [&](const Point& f) { return f.same_location(q); }))
                         first.push_back(q);
                       if (static_cast<int>(first.size()) == bic.init_size()) break;
                     }
                     if (static_cast<int>(first.size()) < bic.init_size()) return PropertyOutcome{};
                     bic.init(first);
                     double weight = 0.0;
                     std::set<PointId> assigned;
                     for (std::size_t i = 0; i < p.size(); ++i) {
                       const auto r = bic.update(p.points[i], p.weights[i]);
                       weight += p.weights[i];
                       if (!assigned.insert(p.points[i].id()).second) return detail::fail("B(x) assigned twice");
                       if (static_cast<double>(bic.live_points().size()) > params.center_budget() + 1.0)
                         return detail::fail("live center budget exceeded");
                       double live = 0.0;
                       for (double w : bic.live_weights()) live += w;
                       if (std::abs(live - weight) > 1e-9 * weight) return detail::fail("live weight != ingested weight");
                       if (bic.phase_cost() > params.gamma * bic.lower_bound() + 1e-9 * bic.lower_bound())
                         return detail::fail("phase cost above gamma L after the update");
                       (void)r;
                     }
                     const auto& l = bic.lower_bounds();
                     for (std::size_t j = 1; j < l.size(); ++j)
                       if (l[j] != l[j - 1] * params.phi) return detail::fail("L is not geometric");
                     std::map<int, double> per_phase;
                     for (const auto& mv : bic.moves()) per_phase[mv.phase] += mv.cost;
                     for (std::size_t j = 0; j < bic.phase_costs().size(); ++j) {
                       const double logged = per_phase[static_cast<int>(j) + 1];
                       const double kj = bic.phase_costs()[j];
                       if (std::abs(logged - kj) > 1e-9 * std::max(1.0, kj)) return detail::fail("move log does not sum to K_j");
                     }
                     return PropertyOutcome{};
                   }});

  cases.push_back({"threshold_monotone", "s' non-increasing, retained points satisfy the threshold, deletions final", 400, 8,
                   [](std::uint64_t seed, int size) {
                     Rng rng(seed);
                     const CostModel model = CostModel::kmeans();
                     const auto bp = BicriterionParams::defaults(model, 2, size, 0.2);
                     StreamBicriterion bic(model, bp, rng.split(1));
                     const WeightedSet p = detail::random_plane(rng, size);
                     bic.init({p.points[0], p.points[1]});
                     auto sp = SamplerParams::sensitivity_schedule(2, size, 0.2, 0.1, 1e-3, model.rho(), 50.0);
                     if (rng.below(2) == 1) sp = SamplerParams::algorithm1_schedule(2, size, 0.2, 0.1, model.rho(), 20.0);
                     ThresholdSampler sampler(model, sp, rng.split(2));
                     std::map<PointId, double> last;
                     std::set<PointId> deleted;
                     for (std::size_t i = 0; i < p.size(); ++i) {
                       const auto r = bic.update(p.points[i], p.weights[i]);
                       sampler.ingest(p.points[i], p.weights[i], r, bic);
                       std::map<PointId, double> now;
                       for (const auto& q : sampler.retained()) {
                         if (deleted.count(q.point.id())) return detail::fail("deleted point reappeared");
                         if (q.threshold > sp.x_scale * q.s) return detail::fail("retained point above its threshold");
                         const auto it = last.find(q.point.id());
                         if (it != last.end() && q.s > it->second) return detail::fail("s' increased");
                         now[q.point.id()] = q.s;
                       }
                       for (const auto& [id, s] : last)
                         if (!now.count(id)) deleted.insert(id);
                       last = std::move(now);
                     }
                     return PropertyOutcome{};
                   }});

  cases.push_back({"merge_reduce_counter", "occupied levels follow binary counting and weight is conserved", 40, 1,
                   [](std::uint64_t seed, int size) {
                     Rng rng(seed);
                     MergeReduceConfig cfg;
                     cfg.k = 2;
                     cfg.n = 64LL * size;
                     cfg.c_const = 1e-6;
                     cfg.segment_size = 64;
                     BucketTree tree(CostModel::kmeans(), cfg, rng.split(1));
                     PointId id = 0;
                     double weight = 0.0;
                     for (int s = 1; s <= size; ++s) {
                       WeightedSet seg;
                       for (int i = 0; i < 64; ++i) {
                         const double w = 0.5 + rng.uniform();
                         seg.push_back(Point::dense(id++, {rng.normal(), rng.normal()}), w);
                         weight += w;
                       }
                       tree.insert_segment(seg);
                       std::vector<int> expect;
                       for (int b = 0; (1 << b) <= s; ++b)
                         if (s & (1 << b)) expect.push_back(b);
                       if (tree.occupied_levels() != expect) return detail::fail("occupied levels differ from binary count");
                       const auto& buckets = tree.buckets();
                       for (std::size_t j = 0; j < buckets.size(); ++j)
                         if (buckets[j] && buckets[j]->accuracy > static_cast<double>(j) * tree.eps_leaf() + 1e-12)
                           return detail::fail("accuracy exceeds level * eps_leaf");
                       const double got = tree.emit().set.total_weight();
                       if (std::abs(got - weight) > 1e-9 * weight) return detail::fail("weight not conserved");
                     }
                     return PropertyOutcome{};
                   }});

  cases.push_back({"solver_oracle_minimal", "exact partition is no worse than other solvers and is weight-split invariant", 10, 3,
                   [](std::uint64_t seed, int size) {
                     Rng rng(seed);
                     const CostModel model = rng.below(2) == 0 ? CostModel::kmeans() : CostModel::kmedian();
                     const int k = 1 + static_cast<int>(rng.below(2));
                     const WeightedSet p = detail::random_line(rng, std::min(size, 11), true);
                     const Solution exact = exact_partition(model, p, k);
                     const Solution other = solve(model, p, k, rng);
                     if (exact.cost > other.cost * (1.0 + 1e-9) + 1e-12) return detail::fail("exact partition beaten");
                     WeightedSet split = p;
                     const std::size_t i = rng.below(p.size());
                     split.weights[i] *= 0.5;
                     Point twin = p.points[i];
                     twin.set_id(1000);
                     split.push_back(twin, split.weights[i]);
                     const Solution exact2 = exact_partition(model, split, k);
                     if (std::abs(exact2.cost - exact.cost) > 1e-9 * std::max(1.0, exact.cost))
                       return detail::fail("splitting a point changed the exact cost");
                     return PropertyOutcome{};
                   }});

  return cases;
}

/// Runs every registered property over seeds [first, last). A failure is shrunk by
/// halving the instance size while it keeps failing.
inline nlohmann::json check_all(std::uint64_t first, std::uint64_t last,
                                const std::vector<std::string>& only = {}) {
  nlohmann::json report;
  report["schema"] = 1;
  report["seeds"] = {first, last};
  nlohmann::json list = nlohmann::json::array();
  bool all = true;
  for (const auto& c : registered_properties()) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    nlohmann::json entry;
    entry["id"] = c.id;
    entry["ref"] = c.ref;
    long long failures = 0;
    std::optional<std::uint64_t> min_seed;
    int min_size = c.size;
    std::string detail;
    for (std::uint64_t seed = first; seed < last; ++seed) {
      PropertyOutcome o;
      try {
        o = c.check(seed, c.size);
      } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
      }
      if (o.passed) continue;
      ++failures;
      if (min_seed) continue;
      min_seed = seed;
      detail = o.detail;
      int size = c.size;
      while (size / 2 >= c.min_size) {
        PropertyOutcome smaller;
        try {
          smaller = c.check(seed, size / 2);
        } catch (const std::exception& e) {
          smaller = {false, std::string("exception: ") + e.what()};
        }
        if (smaller.passed) break;
        size /= 2;
        detail = smaller.detail;
      }
      min_size = size;
    }
    entry["passed"] = failures == 0;
    entry["cases"] = last - first;
    entry["failures"] = failures;
    if (min_seed) {
      entry["minimal_failing_seed"] = *min_seed;
      entry["minimal_size"] = min_size;
      entry["detail"] = detail;
    }
    all = all && failures == 0;
    list.push_back(entry);
  }
  report["properties"] = list;
  report["passed"] = all;
  return report;
}

}  // namespace coreset
