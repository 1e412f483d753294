#pragma once

#include <cmath>
#include <string>
#include <unordered_map>
#include <vector>

#include "coreset/errors.hpp"
#include "coreset/metric.hpp"
#include "coreset/weighted_set.hpp"

namespace coreset {

/// A map from the points of P to a center set B, with per-cluster weights and the
/// total connection cost. Points need not go to their nearest center.
struct Assignment {
  /// Centers; weights[b] is the total weight of the points assigned to b.
  WeightedSet centers;
  /// Parallel to the input set: point id, chosen center index, D(p, center).
  std::vector<PointId> point_ids;
  std::vector<std::size_t> center_of;
  std::vector<double> point_cost;
  double conn_cost = 0.0;
  /// Guarantee the assignment was built under; 0 when unknown.
  double alpha_hint = 0.0;
  double beta_hint = 0.0;
  int k = 1;

  [[nodiscard]] std::size_t size() const { return point_ids.size(); }
  [[nodiscard]] const std::vector<double>& cluster_weight() const { return centers.weights; }
  [[nodiscard]] PointId center_id_of(std::size_t i) const { return centers.points[center_of[i]].id(); }

  [[nodiscard]] std::unordered_map<PointId, PointId> as_map() const {
    std::unordered_map<PointId, PointId> out;
    for (std::size_t i = 0; i < size(); ++i) out.emplace(point_ids[i], center_id_of(i));
    return out;
  }

  /// Builds an assignment from an explicit center index per point. Centers that end
  /// up with zero total weight are dropped.
  static Assignment from_labels(const CostModel& model, const WeightedSet& p, const std::vector<Point>& centers,
                                const std::vector<std::size_t>& label, int k) {
    require(label.size() == p.size(), "assignment: one label per point required");
    std::vector<double> mass(centers.size(), 0.0);
    for (std::size_t i = 0; i < p.size(); ++i) {
      require(label[i] < centers.size(), "assignment: label out of range");
      mass[label[i]] += p.weights[i];
    }
    std::vector<std::size_t> remap(centers.size(), centers.size());
    Assignment a;
    a.k = k;
    for (std::size_t b = 0; b < centers.size(); ++b) {
      if (mass[b] <= 0.0) continue;
      remap[b] = a.centers.size();
      a.centers.push_back(centers[b], mass[b]);
    }
    a.point_ids.reserve(p.size());
    a.center_of.reserve(p.size());
    a.point_cost.reserve(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
      std::size_t b = remap[label[i]];
      if (b == centers.size()) {
        // Zero-weight point whose center was dropped: reattach to the nearest kept center.
        b = dist_to_set(model, p.points[i], a.centers.points).index;
      }
      const double d = model(p.points[i], a.centers.points[b]);
      a.point_ids.push_back(p.points[i].id());
      a.center_of.push_back(b);
      a.point_cost.push_back(d);
      a.conn_cost += p.weights[i] * d;
    }
    return a;
  }

  /// Every point to its nearest center (ties: smallest center id).
  static Assignment nearest(const CostModel& model, const WeightedSet& p, const std::vector<Point>& centers, int k) {
    require(!centers.empty(), "assignment: empty center set");
    std::vector<std::size_t> label(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) label[i] = dist_to_set(model, p.points[i], centers).index;
    return from_labels(model, p, centers, label, k);
  }

  /// Recomputes cluster weights and connection cost; throws InvariantError on mismatch.
  void check(const CostModel& model, const WeightedSet& p) const {
    ensure(point_ids.size() == p.size() && center_of.size() == p.size() && point_cost.size() == p.size(),
           "assignment: size mismatch with input");
    std::vector<double> mass(centers.size(), 0.0);
    double cost = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (point_ids[i] != p.points[i].id())
        throw InvariantError("assignment: point id mismatch at " + std::to_string(i));
      ensure(center_of[i] < centers.size(), "assignment: dangling center index");
      mass[center_of[i]] += p.weights[i];
      const double d = model(p.points[i], centers.points[center_of[i]]);
      ensure(std::abs(d - point_cost[i]) <= 1e-9 * std::max(1.0, d), "assignment: stale point cost");
      cost += p.weights[i] * d;
    }
    for (std::size_t b = 0; b < centers.size(); ++b)
      ensure(std::abs(mass[b] - centers.weights[b]) <= 1e-12 * std::max(1.0, mass[b]), "assignment: cluster weight mismatch");
    ensure(std::abs(cost - conn_cost) <= 1e-9 * std::max(1.0, cost), "assignment: connection cost mismatch");
    if (beta_hint > 0.0)
      ensure(static_cast<double>(centers.size()) <= beta_hint * k + 1e-9, "assignment: more than beta*k centers");
  }
};

}  // namespace coreset
