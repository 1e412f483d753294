#pragma once

#include <cmath>
#include <optional>
#include <unordered_map>
#include <vector>

#include "coreset/assignment.hpp"
#include "coreset/coreset.hpp"
#include "coreset/errors.hpp"
#include "coreset/metric.hpp"
#include "coreset/rng.hpp"
#include "coreset/solvers.hpp"
#include "coreset/weighted_set.hpp"

namespace coreset {

/// Oversampled D-weighted seeding: oversample * k * ceil(log2 max(n,2)) centers, each
/// point assigned to its nearest one. When k is at least the number of distinct
/// locations every location becomes a center and the cost is zero.
/// If an OPT lower bound is supplied, alpha_hint is conn_cost / opt_lower_bound.
inline Assignment dsquared_seed(const CostModel& model, const WeightedSet& p, int k, int oversample, Rng& rng,
                                std::optional<double> opt_lower_bound = std::nullopt) {
  require(!p.empty(), "dsquared_seed: empty input");
  require(k >= 1, "dsquared_seed: k must be >= 1");
  require(oversample >= 1, "dsquared_seed: oversample must be >= 1");
  const auto distinct = detail::distinct_locations(p);
  std::vector<Point> centers;
  if (static_cast<std::size_t>(k) >= distinct.size()) {
    for (auto i : distinct) centers.push_back(p.points[i]);
  } else {
    const auto n = static_cast<double>(std::max<std::size_t>(p.size(), 2));
    const auto target = static_cast<std::size_t>(oversample) * static_cast<std::size_t>(k) *
                        static_cast<std::size_t>(std::ceil(std::log2(n)));
    for (auto i : d_weighted_seeding(model, p, target, rng)) centers.push_back(p.points[i]);
  }
  Assignment a = Assignment::nearest(model, p, centers, k);
  a.beta_hint = static_cast<double>(a.centers.size()) / k;
  if (opt_lower_bound && *opt_lower_bound > 0.0) a.alpha_hint = a.conn_cost / *opt_lower_bound;
  return a;
}

/// Approximation factor of composing an alpha-approximation P -> B with a
/// gamma-approximation B -> C in a rho-metric space.
inline double composed_alpha(double rho, double alpha, double gamma) {
  return rho * alpha + 2.0 * rho * rho * gamma * (alpha + 1.0);
}

/// Composes inner: P -> B with outer: B -> C (outer was built over inner.centers).
inline Assignment compose(const CostModel& model, const WeightedSet& p, const Assignment& inner,
                          const Assignment& outer) {
  if (outer.size() != inner.centers.size()) throw DomainError("compose: outer does not cover the inner centers");
  std::unordered_map<PointId, std::size_t> outer_pos;
  for (std::size_t j = 0; j < outer.size(); ++j) outer_pos.emplace(outer.point_ids[j], j);
  std::vector<std::size_t> label(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const auto it = outer_pos.find(inner.center_id_of(i));
    if (it == outer_pos.end()) throw DomainError("compose: center id missing from the outer assignment");
    label[i] = outer.center_of[it->second];
  }
  Assignment out = Assignment::from_labels(model, p, outer.centers.points, label, inner.k);
  out.alpha_hint = composed_alpha(model.rho(), inner.alpha_hint, outer.alpha_hint);
  out.beta_hint = outer.beta_hint;
  return out;
}

struct ReduceOptions {
  int oversample = 2;
  /// Approximation factor assumed for the seeding when sizing the 1/2-coreset.
  double assumed_alpha = 8.0;
  double c_const = 1.0;
  double delta = 0.1;
  /// Pseudo-dimension constant; 0 means the point dimension + 1.
  int query_dim = 0;
  int rounds = 25;
};

/// Bicriterion -> 1/2-coreset -> k-center solve on the coreset -> reassign all of P.
/// A coreset at least as large as P is replaced by P itself.
inline Assignment reduce_to_constant(const CostModel& model, const WeightedSet& p, int k, Rng& rng,
                                     const ReduceOptions& opt = {}) {
  require(!p.empty(), "reduce_to_constant: empty input");
  const Assignment seed = dsquared_seed(model, p, k, opt.oversample, rng);
  std::size_t dim = 1;
  for (const auto& q : p.points) dim = std::max(dim, q.dim());
  const int qdim = opt.query_dim > 0 ? opt.query_dim : static_cast<int>(dim) + 1;
  const double t = total_sensitivity_bound(model.rho(), opt.assumed_alpha, seed.centers.size());
  const long long m = sample_size(t, QuerySpec(k, qdim), 0.5, opt.delta, opt.c_const);

  Solution sol;
  if (m >= static_cast<long long>(p.size())) {
    sol = solve(model, p, k, rng, opt.rounds);
  } else {
    const CoresetSample half = build_coreset(p, seed, m, rng);
    sol = solve(model, half.set, k, rng, opt.rounds);
  }
  Assignment out = Assignment::nearest(model, p, sol.centers, k);
  out.beta_hint = 1.0;
  return out;
}

}  // namespace coreset
