#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <unordered_map>
#include <vector>

#include "coreset/coreset.hpp"
#include "coreset/errors.hpp"
#include "coreset/metric.hpp"
#include "coreset/rng.hpp"
#include "coreset/solvers.hpp"
#include "coreset/stream_bicriterion.hpp"
#include "coreset/weighted_set.hpp"

namespace coreset {

enum class Schedule {
  /// s'(p) from the cluster-sensitivity bound with a running cost estimate L.
  sensitivity,
  /// s'(p) = the offline sampling probability pr(p) under the online bicriterion.
  algorithm1,
};

inline std::string to_string(Schedule s) { return s == Schedule::sensitivity ? "sensitivity" : "algorithm1"; }

inline Schedule parse_schedule(const std::string& s) {
  if (s == "sensitivity") return Schedule::sensitivity;
  if (s == "algorithm1") return Schedule::algorithm1;
  throw DomainError("unknown schedule '" + s + "'");
}

struct SamplerParams {
  Schedule schedule = Schedule::sensitivity;
  int k = 1;
  long long n = 2;
  double eps = 0.2;
  double delta = 0.1;
  double c_const = 1.0;
  double rho = 1.0;
  /// Approximation factor of p -> p' assumed by the sensitivity bound.
  double alpha_bar = 1.0;
  /// t' = rho*alpha_bar + rho^2*(alpha_bar+1)*k (sensitivity), 1 (algorithm1).
  double t_prime = 1.0;
  /// Retention probability is min(1, x_scale * s'(p)).
  double x_scale = 1.0;
  /// Recompute the approximation C of the live centers on every point.
  bool refresh_every_point = false;
  /// Divide the coreset part of L by alpha_bar as well as (1 + eps).
  bool literal_l_line = false;
  /// Lloyd rounds used to refine C for Euclidean kmeans.
  int refine_rounds = 3;
  /// First bicriterion phase whose fresh points this sampler sees.
  int start_phase = 1;

  /// x = 2c eps^-2 (ln n ln t' + ln(1/delta)).
  static double scale_for(double c_const, double eps, long long n, double t_prime, double delta) {
    const double log_t = t_prime <= 1.0 ? std::log(2.0) : std::log(t_prime);
    return 2.0 * c_const / (eps * eps) *
           (std::log(static_cast<double>(std::max(2LL, n))) * log_t + std::log(1.0 / delta));
  }

  static SamplerParams sensitivity_schedule(int k, long long n, double eps, double delta, double c_const, double rho,
                                            double alpha_bar) {
    require(eps > 0.0 && eps < 1.0, "sampler: eps must lie in (0,1)");
    require(delta > 0.0 && delta < 1.0, "sampler: delta must lie in (0,1)");
    require(c_const > 0.0, "sampler: c must be positive");
    require(alpha_bar > 0.0, "sampler: alpha_bar must be positive");
    SamplerParams p;
    p.schedule = Schedule::sensitivity;
    p.k = k;
    p.n = n;
    p.eps = eps;
    p.delta = delta;
    p.c_const = c_const;
    p.rho = rho;
    p.alpha_bar = alpha_bar;
    p.t_prime = total_sensitivity_bound(rho, alpha_bar, static_cast<std::size_t>(k));
    p.x_scale = scale_for(c_const, eps, n, p.t_prime, delta);
    return p;
  }

  /// Target expected sample size m: x_scale = m and t' = 1 since pr sums to one.
  static SamplerParams algorithm1_schedule(int k, long long n, double eps, double delta, double rho, double m) {
    require(m > 0.0, "sampler: sample budget must be positive");
    SamplerParams p;
    p.schedule = Schedule::algorithm1;
    p.k = k;
    p.n = n;
    p.eps = eps;
    p.delta = delta;
    p.rho = rho;
    p.t_prime = 1.0;
    p.x_scale = m;
    return p;
  }

  /// t' when L is only an estimate: rho*alpha_bar*(1+eps)/(1-eps) + rho^2*(alpha_bar+1)*k.
  [[nodiscard]] double inflated_t_prime() const {
    if (schedule == Schedule::algorithm1) return 1.0;
    return rho * alpha_bar * (1.0 + eps) / (1.0 - eps) + rho * rho * (alpha_bar + 1.0) * k;
  }
};

struct RetainedPoint {
  Point point;
  double weight = 0.0;
  /// Uniform threshold drawn on arrival.
  double threshold = 0.0;
  /// Current (non-increasing) sensitivity bound.
  double s = 1.0;
  /// B(p) at arrival, and D(p, B(p)).
  PointId center = 0;
  double center_dist = 0.0;
  /// Live center currently holding p's weight.
  PointId rep = 0;
  /// Cached D(p, C), D(p, p') and the cluster of p' in C.
  std::size_t cluster = 0;
  double dist_c = 0.0;
  double dist_rep = 0.0;
};

/// Threshold (Poisson) sampler run in lock-step with the online bicriterion. Each
/// point keeps the uniform threshold drawn on arrival; since s'(p) never increases a
/// point deleted once stays deleted, and p is retained at the end with probability
/// min(1, x_scale * s'_final(p)).
class ThresholdSampler {
 public:
  ThresholdSampler(CostModel model, SamplerParams params, Rng rng)
      : model_(std::move(model)), params_(params), rng_(rng) {}

  /// x has just been processed by `bic` with result `r`.
  void ingest(const Point& x, double w, const UpdateResult& r, const StreamBicriterion& bic) {
    if (params_.schedule == Schedule::sensitivity)
      ingest_sensitivity(x, w, r, bic);
    else
      ingest_algorithm1(x, w, r);
    weight_seen_ += w;
    ++points_seen_;
    peak_ = std::max(peak_, retained_.size());
  }

  /// Weights w(p) / min(1, x s'(p)), rescaled to the total weight seen.
  [[nodiscard]] CoresetSample emit() const {
    if (retained_.empty()) throw DomainError("emit_coreset: no retained points");
    CoresetSample out;
    out.provenance = Provenance::streaming;
    out.m = static_cast<long long>(retained_.size());
    for (const auto& r : retained_) out.set.push_back(r.point, r.weight / inclusion(r.s));
    normalize_weight(out, weight_seen_);
    return out;
  }

  [[nodiscard]] double inclusion(double s) const { return std::min(1.0, params_.x_scale * s); }

  [[nodiscard]] const std::vector<RetainedPoint>& retained() const { return retained_; }
  [[nodiscard]] std::size_t size() const { return retained_.size(); }
  [[nodiscard]] std::size_t peak() const { return peak_; }
  [[nodiscard]] const SamplerParams& params() const { return params_; }
  [[nodiscard]] double weight_seen() const { return weight_seen_; }
  [[nodiscard]] long long points_seen() const { return points_seen_; }
  [[nodiscard]] double last_lower_bound() const { return last_l_; }
  [[nodiscard]] const std::vector<Point>& approx_centers() const { return centers_; }
  /// Sum of the current s' over retained points plus those not yet deleted is not
  /// tracked; this is the sum over retained points only.
  [[nodiscard]] double retained_sensitivity() const {
    double t = 0.0;
    for (const auto& r : retained_) t += r.s;
    return t;
  }

 private:
  // ---- sensitivity schedule ----

  void refresh(const StreamBicriterion& bic) {
    const WeightedSet live = bic.live_set();
    centers_.clear();
    if (live.size() <= static_cast<std::size_t>(params_.k)) {
      centers_ = live.points;
    } else if (model_.is_euclidean_kmeans()) {
      centers_ = weighted_lloyd(model_, live, params_.k, params_.refine_rounds, rng_).centers;
    } else {
      for (auto i : d_weighted_seeding(model_, live, static_cast<std::size_t>(params_.k), rng_))
        centers_.push_back(live.points[i]);
    }
    if (centers_.empty()) centers_ = live.points;
    cluster_of_.clear();
    cluster_mass_.assign(centers_.size(), 0.0);
    for (std::size_t b = 0; b < live.size(); ++b) {
      const std::size_t c = dist_to_set(model_, live.points[b], centers_).index;
      cluster_of_[live.points[b].id()] = c;
      cluster_mass_[c] += live.weights[b];
    }
    for (auto& r : retained_) cache(r);
  }

  void cache(RetainedPoint& r) const {
    r.cluster = cluster_index(r.rep);
    r.dist_c = dist_to_set(model_, r.point, centers_).dist;
    r.dist_rep = model_(r.point, centers_[r.cluster]);
  }

  [[nodiscard]] std::size_t cluster_index(PointId rep) const {
    const auto it = cluster_of_.find(rep);
    if (it == cluster_of_.end())
      throw InvariantError("sampler: representative " + std::to_string(rep) + " is not a live center");
    return it->second;
  }

  [[nodiscard]] double bound(const RetainedPoint& r, double l) const {
    const double rho = params_.rho;
    const double a = params_.alpha_bar;
    const double mass = cluster_mass_[r.cluster];
    double cost_term = 0.0;
    if (r.dist_rep > 0.0) cost_term = l > 0.0 ? rho * a * r.weight * r.dist_rep / l : std::numeric_limits<double>::infinity();
    const double cluster_term = r.weight > 0.0 ? rho * rho * (a + 1.0) * r.weight / mass : 0.0;
    return cost_term + cluster_term;
  }

  void ingest_sensitivity(const Point& x, double w, const UpdateResult& r, const StreamBicriterion& bic) {
    RetainedPoint fresh;
    fresh.point = x;
    fresh.weight = w;
    fresh.center = r.center;
    fresh.center_dist = r.dist;
    fresh.rep = r.center;
    for (const auto& ev : r.replays) {
      if (ev.from == ev.to) continue;
      if (fresh.rep == ev.from) fresh.rep = ev.to;
      for (auto& q : retained_)
        if (q.rep == ev.from) q.rep = ev.to;
    }

    if (r.centers_changed || params_.refresh_every_point || centers_.empty()) {
      refresh(bic);
    } else {
      cluster_mass_[cluster_index(fresh.rep)] += w;
    }
    cache(fresh);

    double coreset_cost = 0.0;
    if (!retained_.empty()) {
      double raw_total = 0.0;
      double raw_cost = 0.0;
      for (const auto& q : retained_) {
        const double v = q.weight / inclusion(q.s);
        raw_total += v;
        raw_cost += v * q.dist_c;
      }
      if (raw_total > 0.0) coreset_cost = raw_cost * (weight_seen_ / raw_total);
    }
    double l = fresh.dist_c + coreset_cost / (1.0 + params_.eps);
    if (params_.literal_l_line) l = fresh.dist_c + coreset_cost / (params_.alpha_bar * (1.0 + params_.eps));
    last_l_ = l;

    std::erase_if(retained_, [&](RetainedPoint& q) {
      q.s = std::min(q.s, bound(q, l));
      return q.threshold > params_.x_scale * q.s;
    });

    fresh.s = std::min(1.0, bound(fresh, l));
    fresh.threshold = rng_.uniform();
    if (fresh.threshold <= params_.x_scale * fresh.s) retained_.push_back(std::move(fresh));
  }

  // ---- algorithm1 schedule ----

  [[nodiscard]] double offline_probability(const RetainedPoint& q) const {
    if (q.weight == 0.0) return 0.0;
    const double nb = static_cast<double>(suffix_cluster_.size());
    const double uniform = q.weight / (nb * suffix_cluster_.at(q.center));
    return suffix_cost_ > 0.0 ? 0.5 * q.weight * q.center_dist / suffix_cost_ + 0.5 * uniform : uniform;
  }

  void ingest_algorithm1(const Point& x, double w, const UpdateResult& r) {
    suffix_cluster_[r.center] += w;
    suffix_cost_ += w * r.dist;
    RetainedPoint fresh;
    fresh.point = x;
    fresh.weight = w;
    fresh.center = r.center;
    fresh.center_dist = r.dist;
    fresh.rep = r.center;
    std::erase_if(retained_, [&](RetainedPoint& q) {
      q.s = std::min(q.s, offline_probability(q));
      return q.threshold > params_.x_scale * q.s;
    });
    fresh.s = offline_probability(fresh);
    fresh.threshold = rng_.uniform();
    if (fresh.threshold <= params_.x_scale * fresh.s) retained_.push_back(std::move(fresh));
  }

  CostModel model_;
  SamplerParams params_;
  Rng rng_;
  std::vector<RetainedPoint> retained_;
  double weight_seen_ = 0.0;
  long long points_seen_ = 0;
  std::size_t peak_ = 0;
  double last_l_ = 0.0;

  std::vector<Point> centers_;
  std::unordered_map<PointId, std::size_t> cluster_of_;
  std::vector<double> cluster_mass_;

  std::unordered_map<PointId, double> suffix_cluster_;
  double suffix_cost_ = 0.0;
};

/// Union of an Earth-Mover-certified snapshot M_j and the sample of the stream after
/// R_j. `sample_start` is the first phase the sample covers; it must be j + 1 (or 1
/// when there is no snapshot).
inline CoresetSample assemble(const Snapshot* snapshot, int sample_start, const CoresetSample* sample) {
  const int expected = snapshot ? snapshot->phase + 1 : 1;
  if (sample && sample_start != expected)
    throw DomainError("assemble: sample starts at phase " + std::to_string(sample_start) + ", expected " +
                      std::to_string(expected));
  CoresetSample out;
  out.provenance = Provenance::streaming;
  if (snapshot) out.set = snapshot->summary;
  if (sample) {
    out.set.append(sample->set);
    out.m = sample->m;
  }
  return out;
}

}  // namespace coreset
