#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "coreset/errors.hpp"
#include "coreset/metric.hpp"
#include "coreset/rng.hpp"
#include "coreset/weighted_set.hpp"

namespace coreset {

enum class SolverMethod { lloyd, medoid_swap, exact_partition };

inline std::string to_string(SolverMethod m) {
  switch (m) {
    case SolverMethod::lloyd: return "lloyd";
    case SolverMethod::medoid_swap: return "medoid_swap";
    case SolverMethod::exact_partition: return "exact_partition";
  }
  return "?";
}

struct Solution {
  std::vector<Point> centers;
  double cost = 0.0;
  SolverMethod method = SolverMethod::lloyd;
  /// Cost after each Lloyd round, or after each accepted swap.
  std::vector<double> trace;
  /// medoid_swap: no improving single swap remained at termination.
  bool locally_optimal = false;
};

namespace detail {

/// Indices of the first occurrence of each distinct location.
inline std::vector<std::size_t> distinct_locations(const WeightedSet& a) {
  std::map<std::vector<double>, std::size_t> seen;
  std::size_t d = 0;
  for (const auto& p : a.points) d = std::max(d, p.dim());
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (seen.emplace(a.points[i].to_dense(d), i).second) out.push_back(i);
  }
  return out;
}

inline std::size_t pick_by_mass(std::span<const double> mass, double total, Rng& rng) {
  const double target = rng.uniform() * total;
  double acc = 0.0;
  std::size_t last_positive = mass.size();
  for (std::size_t i = 0; i < mass.size(); ++i) {
    if (mass[i] <= 0.0) continue;
    acc += mass[i];
    last_positive = i;
    if (target < acc) return i;
  }
  return last_positive;
}

}  // namespace detail

/// D-weighted seeding: the first index with probability proportional to w(p), each
/// next with probability proportional to w(p) D(p, chosen). Stops early when every
/// remaining point has zero mass.
inline std::vector<std::size_t> d_weighted_seeding(const CostModel& model, const WeightedSet& a, std::size_t count,
                                                   Rng& rng) {
  std::vector<std::size_t> chosen;
  if (a.empty() || count == 0) return chosen;
  std::vector<double> mass(a.weights);
  std::vector<double> nearest(a.size(), std::numeric_limits<double>::infinity());
  double total = a.total_weight();
  if (total <= 0.0) return chosen;
  while (chosen.size() < count && total > 0.0) {
    const std::size_t c = detail::pick_by_mass(mass, total, rng);
    chosen.push_back(c);
    total = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      nearest[i] = std::min(nearest[i], model(a.points[i], a.points[c]));
      mass[i] = a.weights[i] * nearest[i];
      total += mass[i];
    }
  }
  return chosen;
}

namespace detail {

inline Solution all_distinct(const CostModel& model, const WeightedSet& a, const std::vector<std::size_t>& idx,
                             SolverMethod method) {
  Solution sol;
  sol.method = method;
  for (auto i : idx) sol.centers.push_back(a.points[i]);
  sol.cost = bar_cost(model, a, sol.centers);
  sol.locally_optimal = true;
  return sol;
}

inline std::vector<std::vector<double>> dense_matrix(const WeightedSet& a, std::size_t& dim) {
  dim = 0;
  for (const auto& p : a.points) dim = std::max(dim, p.dim());
  std::vector<std::vector<double>> out;
  out.reserve(a.size());
  for (const auto& p : a.points) {
    if (!p.is_sparse() && p.dim() != dim) throw DomainError("lloyd: dense points of differing dimension");
    out.push_back(p.to_dense(dim));
  }
  return out;
}

inline double sq_dist(const std::vector<double>& x, const std::vector<double>& y) {
  double s = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double d = x[j] - y[j];
    s += d * d;
  }
  return s;
}

}  // namespace detail

/// Weighted k-means: D^2 seeding, then `rounds` of assignment + weighted centroid
/// updates. Centers get ids -1, -2, ... Requires the squared-Euclidean model.
inline Solution weighted_lloyd(const CostModel& model, const WeightedSet& a, int k, int rounds, Rng& rng) {
  require(model.is_euclidean_kmeans(), "weighted_lloyd: requires the Euclidean kmeans model");
  require(k >= 1, "weighted_lloyd: k must be >= 1");
  require(rounds >= 1, "weighted_lloyd: rounds must be >= 1");
  require(!a.empty(), "weighted_lloyd: empty input");
  const auto distinct = detail::distinct_locations(a);
  if (static_cast<std::size_t>(k) >= distinct.size()) return detail::all_distinct(model, a, distinct, SolverMethod::lloyd);

  std::size_t dim = 0;
  const auto x = detail::dense_matrix(a, dim);
  std::vector<std::vector<double>> c;
  for (auto i : d_weighted_seeding(model, a, static_cast<std::size_t>(k), rng)) c.push_back(x[i]);

  const std::size_t n = a.size();
  std::vector<std::size_t> label(n, 0);
  Solution sol;
  sol.method = SolverMethod::lloyd;
  for (int round = 0; round < rounds; ++round) {
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < c.size(); ++j) {
        const double d = detail::sq_dist(x[i], c[j]);
        if (d < best) {
          best = d;
          label[i] = j;
        }
      }
    }
    std::vector<std::vector<double>> sum(c.size(), std::vector<double>(dim, 0.0));
    std::vector<double> mass(c.size(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double w = a.weights[i];
      if (w == 0.0) continue;
      mass[label[i]] += w;
      for (std::size_t j = 0; j < dim; ++j) sum[label[i]][j] += w * x[i][j];
    }
    bool moved = false;
    for (std::size_t j = 0; j < c.size(); ++j) {
      if (mass[j] <= 0.0) continue;
      for (std::size_t t = 0; t < dim; ++t) {
        const double v = sum[j][t] / mass[j];
        if (v != c[j][t]) moved = true;
        c[j][t] = v;
      }
    }
    double cost = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& cj : c) best = std::min(best, detail::sq_dist(x[i], cj));
      cost += a.weights[i] * best;
    }
    sol.trace.push_back(cost);
    if (!moved) break;
  }
  for (std::size_t j = 0; j < c.size(); ++j) sol.centers.push_back(Point::dense(-static_cast<PointId>(j) - 1, c[j]));
  sol.cost = bar_cost(model, a, sol.centers);
  return sol;
}

/// Single-swap local search with centers restricted to input points. Each pass
/// applies the best improving swap; stops at a local optimum or after max_swaps.
inline Solution medoid_swap(const CostModel& model, const WeightedSet& a, int k, int max_swaps, Rng& rng) {
  require(k >= 1, "medoid_swap: k must be >= 1");
  require(!a.empty(), "medoid_swap: empty input");
  const auto distinct = detail::distinct_locations(a);
  if (static_cast<std::size_t>(k) >= distinct.size())
    return detail::all_distinct(model, a, distinct, SolverMethod::medoid_swap);

  const std::size_t n = a.size();
  std::vector<std::size_t> centers = d_weighted_seeding(model, a, static_cast<std::size_t>(k), rng);
  // Zero-weight inputs can starve the seeding; top up with unused distinct locations.
  for (auto i : distinct) {
    if (centers.size() >= static_cast<std::size_t>(k)) break;
    bool used = false;
    for (auto c : centers) used = used || a.points[c].same_location(a.points[i]);
    if (!used) centers.push_back(i);
  }

  std::vector<std::vector<double>> dc(centers.size(), std::vector<double>(n));
  for (std::size_t j = 0; j < centers.size(); ++j)
    for (std::size_t i = 0; i < n; ++i) dc[j][i] = model(a.points[i], a.points[centers[j]]);

  std::vector<double> first(n), second(n);
  std::vector<std::size_t> first_slot(n);
  auto refresh = [&]() {
    double cost = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      first[i] = second[i] = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < centers.size(); ++j) {
        const double d = dc[j][i];
        if (d < first[i]) {
          second[i] = first[i];
          first[i] = d;
          first_slot[i] = j;
        } else if (d < second[i]) {
          second[i] = d;
        }
      }
      cost += a.weights[i] * first[i];
    }
    return cost;
  };

  Solution sol;
  sol.method = SolverMethod::medoid_swap;
  double cost = refresh();
  std::vector<double> dj(n);
  std::vector<char> is_center(n, 0);
  for (auto c : centers) is_center[c] = 1;
  int swaps = 0;
  while (true) {
    double best_cost = cost;
    std::size_t best_slot = 0, best_cand = n;
    for (std::size_t cand = 0; cand < n; ++cand) {
      if (is_center[cand]) continue;
      for (std::size_t i = 0; i < n; ++i) dj[i] = model(a.points[i], a.points[cand]);
      for (std::size_t slot = 0; slot < centers.size(); ++slot) {
        double c = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          const double keep = first_slot[i] == slot ? second[i] : first[i];
          c += a.weights[i] * std::min(keep, dj[i]);
        }
        if (c < best_cost) {
          best_cost = c;
          best_slot = slot;
          best_cand = cand;
        }
      }
    }
    const bool improving = best_cand < n && best_cost < cost - 1e-12 * std::max(cost, 1.0);
    if (!improving) {
      sol.locally_optimal = true;
      break;
    }
    if (swaps >= max_swaps) break;
    is_center[centers[best_slot]] = 0;
    is_center[best_cand] = 1;
    centers[best_slot] = best_cand;
    for (std::size_t i = 0; i < n; ++i) dc[best_slot][i] = model(a.points[i], a.points[best_cand]);
    cost = refresh();
    sol.trace.push_back(cost);
    ++swaps;
  }
  for (auto c : centers) sol.centers.push_back(a.points[c]);
  sol.cost = bar_cost(model, a, sol.centers);
  return sol;
}

/// Exhaustive search over all partitions into at most k clusters (n <= 12, k <= 3).
/// Each cluster's center is its weighted centroid for Euclidean kmeans, otherwise the
/// best input point, so for other models this is exact over input-restricted centers.
inline Solution exact_partition(const CostModel& model, const WeightedSet& a, int k) {
  require(k >= 1, "exact_partition: k must be >= 1");
  if (a.size() > 12 || k > 3) throw DomainError("exact_partition: requires n <= 12 and k <= 3");
  require(!a.empty(), "exact_partition: empty input");
  const std::size_t n = a.size();
  const std::size_t masks = std::size_t{1} << n;
  const bool centroid = model.is_euclidean_kmeans();

  std::vector<std::vector<double>> dmat(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) dmat[i][j] = model(a.points[i], a.points[j]);
  std::size_t dim = 0;
  std::vector<std::vector<double>> x;
  if (centroid) x = detail::dense_matrix(a, dim);

  // Best center for every subset, memoized by bitmask.
  std::vector<double> mask_cost(masks, 0.0);
  std::vector<std::vector<double>> mask_center(centroid ? masks : 0);
  std::vector<std::size_t> mask_medoid(centroid ? 0 : masks, 0);
  for (std::size_t m = 1; m < masks; ++m) {
    if (centroid) {
      std::vector<double> c(dim, 0.0);
      double mass = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        if (m >> i & 1) {
          mass += a.weights[i];
          for (std::size_t t = 0; t < dim; ++t) c[t] += a.weights[i] * x[i][t];
        }
      if (mass > 0.0) {
        for (auto& v : c) v /= mass;
      } else {
        c = x[static_cast<std::size_t>(__builtin_ctzll(m))];
      }
      double cost = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        if (m >> i & 1) cost += a.weights[i] * detail::sq_dist(x[i], c);
      mask_cost[m] = cost;
      mask_center[m] = std::move(c);
    } else {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t cand = 0; cand < n; ++cand) {
        double cost = 0.0;
        for (std::size_t i = 0; i < n; ++i)
          if (m >> i & 1) cost += a.weights[i] * dmat[i][cand];
        if (cost < best) {
          best = cost;
          mask_medoid[m] = cand;
        }
      }
      mask_cost[m] = best;
    }
  }

  // Restricted-growth strings: point i joins an existing block or opens the next one.
  std::vector<std::size_t> best_masks;
  double best_cost = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> block(static_cast<std::size_t>(k), 0);
  auto visit = [&](auto&& self, std::size_t i, int used) -> void {
    if (i == n) {
      double cost = 0.0;
      for (int b = 0; b < used; ++b) cost += mask_cost[block[static_cast<std::size_t>(b)]];
      if (cost < best_cost) {
        best_cost = cost;
        best_masks.assign(block.begin(), block.begin() + used);
      }
      return;
    }
    const int limit = std::min(used + 1, k);
    for (int b = 0; b < limit; ++b) {
      block[static_cast<std::size_t>(b)] |= std::size_t{1} << i;
      self(self, i + 1, std::max(used, b + 1));
      block[static_cast<std::size_t>(b)] &= ~(std::size_t{1} << i);
    }
  };
  visit(visit, 0, 0);

  Solution sol;
  sol.method = SolverMethod::exact_partition;
  for (std::size_t b = 0; b < best_masks.size(); ++b) {
    if (centroid)
      sol.centers.push_back(Point::dense(-static_cast<PointId>(b) - 1, mask_center[best_masks[b]]));
    else
      sol.centers.push_back(a.points[mask_medoid[best_masks[b]]]);
  }
  // Two blocks may share a medoid; keep ids unique.
  std::sort(sol.centers.begin(), sol.centers.end(), [](const Point& p, const Point& q) { return p.id() < q.id(); });
  sol.centers.erase(std::unique(sol.centers.begin(), sol.centers.end(),
                                [](const Point& p, const Point& q) { return p.id() == q.id(); }),
                    sol.centers.end());
  sol.cost = bar_cost(model, a, sol.centers);
  sol.locally_optimal = true;
  return sol;
}

/// Lloyd for Euclidean kmeans, medoid swap otherwise.
inline Solution solve(const CostModel& model, const WeightedSet& a, int k, Rng& rng, int rounds = 25) {
  if (model.is_euclidean_kmeans()) return weighted_lloyd(model, a, k, rounds, rng);
  return medoid_swap(model, a, k, rounds * k, rng);
}

}  // namespace coreset
