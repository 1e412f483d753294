#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "coreset/errors.hpp"
#include "coreset/metric.hpp"

namespace coreset {

/// Points with nonnegative weights. Ids are unique within a set.
struct WeightedSet {
  std::vector<Point> points;
  std::vector<double> weights;

  WeightedSet() = default;
  WeightedSet(std::vector<Point> pts, std::vector<double> w) : points(std::move(pts)), weights(std::move(w)) {
    validate();
  }

  /// Unit weights.
  static WeightedSet uniform(std::vector<Point> pts) {
    std::vector<double> w(pts.size(), 1.0);
    return {std::move(pts), std::move(w)};
  }

  [[nodiscard]] std::size_t size() const { return points.size(); }
  [[nodiscard]] bool empty() const { return points.empty(); }

  [[nodiscard]] double total_weight() const { return std::accumulate(weights.begin(), weights.end(), 0.0); }

  void push_back(Point p, double w) {
    points.push_back(std::move(p));
    weights.push_back(w);
  }

  void append(const WeightedSet& other) {
    points.insert(points.end(), other.points.begin(), other.points.end());
    weights.insert(weights.end(), other.weights.begin(), other.weights.end());
  }

  void validate() const {
    if (points.size() != weights.size()) throw DomainError("weighted set: points/weights length mismatch");
    std::unordered_set<PointId> ids;
    ids.reserve(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (!(weights[i] >= 0.0) || !std::isfinite(weights[i]))
        throw DomainError("weighted set: weight of point " + std::to_string(points[i].id()) + " is not a finite nonnegative number");
      if (!ids.insert(points[i].id()).second)
        throw DomainError("weighted set: duplicate point id " + std::to_string(points[i].id()));
    }
  }
};

/// k and the configured pseudo-dimension constant used by the sample-size bounds.
struct QuerySpec {
  int k = 1;
  int dim = 1;

  QuerySpec() = default;
  QuerySpec(int k_, int dim_) : k(k_), dim(dim_) {
    require(k >= 1, "QuerySpec: k must be >= 1");
    require(dim >= 1, "QuerySpec: dimension must be >= 1");
  }
};

/// Per-point sensitivity upper bounds and their sum.
struct SensitivityProfile {
  std::vector<double> s;
  double total = 0.0;

  SensitivityProfile() = default;
  explicit SensitivityProfile(std::vector<double> values) : s(std::move(values)) {
    total = std::accumulate(s.begin(), s.end(), 0.0);
  }
};

/// Weighted clustering cost sum_p w(p) D(p, C).
inline double bar_cost(const CostModel& model, const WeightedSet& a, std::span<const Point> centers) {
  if (centers.empty()) throw DomainError("bar_cost: empty center set");
  double total = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a.weights[i] == 0.0) continue;
    total += a.weights[i] * dist_to_set(model, a.points[i], centers).dist;
  }
  return total;
}

/// |a - b| / (a + b + nu).
inline double nu_distance(double a, double b, double nu) {
  require(a >= 0.0 && b >= 0.0, "nu_distance: arguments must be nonnegative");
  require(nu > 0.0, "nu_distance: nu must be positive");
  return std::abs(a - b) / (a + b + nu);
}

/// Exact sensitivity restricted to an explicit list of candidate queries:
/// s(p) = max_Z w(p) D(p,Z) / sum_q w(q) D(q,Z). Zero-cost queries are skipped.
inline SensitivityProfile brute_sensitivity(const CostModel& model, const WeightedSet& p, int k,
                                            const std::vector<std::vector<Point>>& candidates) {
  require(!candidates.empty(), "brute_sensitivity: no candidate queries");
  std::vector<double> s(p.size(), 0.0);
  std::vector<double> contrib(p.size());
  bool any = false;
  for (const auto& z : candidates) {
    require(!z.empty() && static_cast<int>(z.size()) <= k, "brute_sensitivity: query size must be in [1, k]");
    double total = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      contrib[i] = p.weights[i] * dist_to_set(model, p.points[i], z).dist;
      total += contrib[i];
    }
    if (total <= 0.0) continue;
    any = true;
    for (std::size_t i = 0; i < p.size(); ++i) s[i] = std::max(s[i], contrib[i] / total);
  }
  if (!any) throw DomainError("brute_sensitivity: every candidate query has zero cost");
  return SensitivityProfile(std::move(s));
}

enum class SampleBound {
  /// m >= (c t / eps^2) (d k ln t + ln(1/delta))
  quadratic_in_k,
  /// m >= (c k (t + beta) / eps^2) (d ln t + ln(beta k) + ln(1/delta))
  near_linear_in_k,
};

/// Sample size for an eps-coreset with failure probability delta. Natural logs;
/// ln t is clamped to ln 2 when t <= 1.
inline long long sample_size(double t, const QuerySpec& spec, double eps, double delta, double c_const,
                             SampleBound bound = SampleBound::quadratic_in_k, double beta = 1.0) {
  require(t > 0.0, "sample_size: total sensitivity must be positive");
  require(eps > 0.0 && eps < 1.0, "sample_size: eps must lie in (0,1)");
  require(delta > 0.0 && delta < 1.0, "sample_size: delta must lie in (0,1)");
  require(c_const > 0.0, "sample_size: c must be positive");
  const double log_t = t <= 1.0 ? std::log(2.0) : std::log(t);
  const double k = spec.k;
  const double d = spec.dim;
  double m = 0.0;
  if (bound == SampleBound::quadratic_in_k) {
    m = c_const * t / (eps * eps) * (d * k * log_t + std::log(1.0 / delta));
  } else {
    require(beta >= 1.0, "sample_size: beta must be >= 1");
    m = c_const * k * (t + beta) / (eps * eps) * (d * log_t + std::log(beta * k) + std::log(1.0 / delta));
  }
  return std::max(1LL, static_cast<long long>(std::ceil(m)));
}

}  // namespace coreset
