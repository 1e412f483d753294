#pragma once

#include <cmath>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "coreset/assignment.hpp"
#include "coreset/errors.hpp"
#include "coreset/metric.hpp"
#include "coreset/rng.hpp"
#include "coreset/weighted_set.hpp"

namespace coreset {

enum class Provenance { offline, streaming, merge_reduce };

inline std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::offline: return "offline";
    case Provenance::streaming: return "streaming";
    case Provenance::merge_reduce: return "merge_reduce";
  }
  return "?";
}

/// A weighted sample (S, u) together with what is needed to audit it.
struct CoresetSample {
  WeightedSet set;
  /// Requested sample size (number of draws), or the expected size for threshold samples.
  long long m = 0;
  /// Sampling distribution over the source set; empty when not applicable.
  std::vector<double> pr;
  /// For each sampled point: index into the source set and number of draws.
  std::vector<std::size_t> source;
  std::vector<long long> draws;
  Provenance provenance = Provenance::offline;
};

/// Vose alias table: O(n) build, O(1) draws.
class AliasTable {
 public:
  explicit AliasTable(const std::vector<double>& p) : prob_(p.size()), alias_(p.size()) {
    require(!p.empty(), "alias table: empty distribution");
    const double total = std::accumulate(p.begin(), p.end(), 0.0);
    require(total > 0.0, "alias table: zero total mass");
    const std::size_t n = p.size();
    std::vector<double> scaled(n);
    std::vector<std::size_t> small, large;
    for (std::size_t i = 0; i < n; ++i) {
      scaled[i] = p[i] * static_cast<double>(n) / total;
      (scaled[i] < 1.0 ? small : large).push_back(i);
    }
    while (!small.empty() && !large.empty()) {
      const std::size_t s = small.back();
      small.pop_back();
      const std::size_t l = large.back();
      prob_[s] = scaled[s];
      alias_[s] = l;
      scaled[l] = (scaled[l] + scaled[s]) - 1.0;
      if (scaled[l] < 1.0) {
        large.pop_back();
        small.push_back(l);
      }
    }
    for (auto i : large) prob_[i] = 1.0, alias_[i] = i;
    for (auto i : small) prob_[i] = 1.0, alias_[i] = i;
  }

  std::size_t draw(Rng& rng) const {
    const std::size_t column = static_cast<std::size_t>(rng.below(prob_.size()));
    return rng.uniform() < prob_[column] ? column : alias_[column];
  }

 private:
  std::vector<double> prob_;
  std::vector<std::size_t> alias_;
};

namespace detail {

inline void check_covers(const WeightedSet& p, const Assignment& a) {
  if (p.empty()) throw DomainError("coreset: empty input set");
  if (a.size() != p.size()) throw DomainError("coreset: assignment does not cover the input");
  for (std::size_t i = 0; i < p.size(); ++i)
    if (a.point_ids[i] != p.points[i].id()) throw DomainError("coreset: assignment/input id mismatch");
}

inline std::size_t positive_clusters(const Assignment& a) {
  std::size_t n = 0;
  for (double w : a.cluster_weight()) n += w > 0.0 ? 1 : 0;
  return n;
}

}  // namespace detail

/// pr(p) = w(p) D(p,B(p)) / (2 sum_q w(q) D(q,B(q))) + w(p) / (2 |B| W_{B(p)}).
/// With zero total connection cost the first term is dropped and the second doubled.
inline std::vector<double> sampling_distribution(const WeightedSet& p, const Assignment& a) {
  detail::check_covers(p, a);
  const std::size_t nb = detail::positive_clusters(a);
  if (nb == 0) throw DomainError("sampling_distribution: total weight is zero");
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) total += p.weights[i] * a.point_cost[i];
  std::vector<double> pr(p.size(), 0.0);
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double w = p.weights[i];
    if (w == 0.0) continue;
    const double cluster = a.cluster_weight()[a.center_of[i]];
    if (!(cluster > 0.0)) throw DomainError("sampling_distribution: cluster weights must be positive");
    const double uniform = w / (static_cast<double>(nb) * cluster);
    pr[i] = total > 0.0 ? 0.5 * w * a.point_cost[i] / total + 0.5 * uniform : uniform;
  }
  return pr;
}

/// Draws m i.i.d. indices from pr; each sampled point gets u(p) = draws(p) w(p) / (m pr(p)).
inline CoresetSample build_coreset(const WeightedSet& p, const Assignment& a, long long m, Rng& rng) {
  require(m >= 1, "build_coreset: m must be >= 1");
  CoresetSample out;
  out.m = m;
  out.pr = sampling_distribution(p, a);
  const AliasTable alias(out.pr);
  std::map<std::size_t, long long> counts;
  for (long long j = 0; j < m; ++j) ++counts[alias.draw(rng)];
  for (const auto& [i, c] : counts) {
    out.set.push_back(p.points[i], static_cast<double>(c) * p.weights[i] / (static_cast<double>(m) * out.pr[i]));
    out.source.push_back(i);
    out.draws.push_back(c);
  }
  return out;
}

/// s'(p) = rho*alpha*w(p)*D(p,p') / sum_q w(q)D(q,q') + rho^2*(alpha+1)*w(p) / W_{B(p)},
/// an upper bound on the sensitivity when the assignment is an alpha-approximation.
/// With zero total connection cost only the cluster term remains.
inline SensitivityProfile sensitivity_from_assignment(const WeightedSet& p, const Assignment& a, double rho,
                                                      double alpha) {
  detail::check_covers(p, a);
  require(rho >= 1.0, "sensitivity_from_assignment: rho must be >= 1");
  require(alpha > 0.0, "sensitivity_from_assignment: alpha must be positive");
  for (double w : a.cluster_weight())
    if (!(w > 0.0)) throw DomainError("sensitivity_from_assignment: cluster of zero weight");
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) total += p.weights[i] * a.point_cost[i];
  std::vector<double> s(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double w = p.weights[i];
    const double cluster_term = rho * rho * (alpha + 1.0) * w / a.cluster_weight()[a.center_of[i]];
    const double cost_term = total > 0.0 ? rho * alpha * w * a.point_cost[i] / total : 0.0;
    s[i] = cost_term + cluster_term;
  }
  return SensitivityProfile(std::move(s));
}

/// t' = rho*alpha + rho^2*(alpha+1)*|B|.
inline double total_sensitivity_bound(double rho, double alpha, std::size_t clusters) {
  return rho * alpha + rho * rho * (alpha + 1.0) * static_cast<double>(clusters);
}

/// Rescales the weights so they sum to `target`.
inline void normalize_weight(CoresetSample& s, double target) {
  const double total = s.set.total_weight();
  if (total <= 0.0) return;
  const double f = target / total;
  for (auto& w : s.set.weights) w *= f;
}

}  // namespace coreset
