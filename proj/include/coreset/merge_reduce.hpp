#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "coreset/bicriterion.hpp"
#include "coreset/coreset.hpp"
#include "coreset/errors.hpp"
#include "coreset/metric.hpp"
#include "coreset/rng.hpp"
#include "coreset/weighted_set.hpp"

namespace coreset {

struct MergeReduceConfig {
  int k = 3;
  long long n = 1000;
  double eps = 0.25;
  double delta = 0.1;
  double c_const = 1.0;
  /// Pseudo-dimension constant per center; 0 means point dimension + 1.
  int query_dim = 0;
  int point_dim = 2;
  int oversample = 2;
  /// Approximation factor assumed for the per-merge seeding when sizing samples.
  double assumed_alpha = 8.0;
  std::optional<long long> segment_size;
};

struct Bucket {
  CoresetSample sample;
  /// Accumulated accuracy of this summary.
  double accuracy = 0.0;
  /// Stream weight summarized.
  double weight = 0.0;
  long long points = 0;
};

/// Binary-counter tree of coresets of coresets. Level j summarizes
/// segment_size * 2^j stream points with accuracy j * eps_leaf.
class BucketTree {
 public:
  BucketTree(CostModel model, MergeReduceConfig cfg, Rng rng) : model_(std::move(model)), cfg_(cfg), rng_(rng) {
    require(cfg.k >= 1, "merge-reduce: k must be >= 1");
    require(cfg.eps > 0.0 && cfg.eps < 1.0, "merge-reduce: eps must lie in (0,1)");
    require(cfg.n >= 1, "merge-reduce: n must be >= 1");
    calibrate();
  }

  /// Appends one stream point; a full segment is pushed into the tree.
  void insert(const Point& x, double w) {
    pending_.push_back(x, w);
    if (static_cast<long long>(pending_.size()) >= segment_size_) flush();
    track();
  }

  /// Inserts a whole segment (at most segment_size points).
  void insert_segment(const WeightedSet& segment) {
    require(!segment.empty(), "mr_insert: empty segment");
    require(static_cast<long long>(segment.size()) <= segment_size_, "mr_insert: segment larger than segment_size");
    Bucket leaf;
    leaf.sample.set = segment;
    leaf.sample.m = static_cast<long long>(segment.size());
    leaf.sample.provenance = Provenance::merge_reduce;
    leaf.weight = segment.total_weight();
    leaf.points = static_cast<long long>(segment.size());
    carry(std::move(leaf));
    ++segments_;
    track();
  }

  /// Pushes a partial trailing segment, if any.
  void flush() {
    if (pending_.empty()) return;
    WeightedSet seg = std::move(pending_);
    pending_ = WeightedSet{};
    insert_segment(seg);
  }

  /// Union of all occupied buckets plus the pending segment.
  [[nodiscard]] CoresetSample emit() const {
    CoresetSample out;
    out.provenance = Provenance::merge_reduce;
    bool any = false;
    for (const auto& b : buckets_) {
      if (!b) continue;
      out.set.append(b->sample.set);
      any = true;
    }
    if (!pending_.empty()) {
      out.set.append(pending_);
      any = true;
    }
    if (!any) throw DomainError("mr_emit: empty tree");
    out.m = static_cast<long long>(out.set.size());
    return out;
  }

  /// Largest accumulated accuracy over occupied buckets.
  [[nodiscard]] double accuracy() const {
    double a = 0.0;
    for (const auto& b : buckets_)
      if (b) a = std::max(a, b->accuracy);
    return a;
  }

  [[nodiscard]] std::vector<int> occupied_levels() const {
    std::vector<int> out;
    for (std::size_t j = 0; j < buckets_.size(); ++j)
      if (buckets_[j]) out.push_back(static_cast<int>(j));
    return out;
  }

  [[nodiscard]] const std::vector<std::optional<Bucket>>& buckets() const { return buckets_; }
  [[nodiscard]] long long segment_size() const { return segment_size_; }
  [[nodiscard]] double eps_leaf() const { return eps_leaf_; }
  [[nodiscard]] int levels() const { return levels_; }
  [[nodiscard]] long long reduce_size() const { return m_leaf_; }
  [[nodiscard]] long long segments() const { return segments_; }

  [[nodiscard]] std::size_t stored_points() const {
    std::size_t n = pending_.size();
    for (const auto& b : buckets_)
      if (b) n += b->sample.set.size();
    return n;
  }
  [[nodiscard]] std::size_t peak_stored() const { return peak_; }

 private:
  [[nodiscard]] long long sample_size_at(double eps, long long input) const {
    const double nb = static_cast<double>(cfg_.oversample) * cfg_.k *
                      std::ceil(std::log2(static_cast<double>(std::max(2LL, input))));
    const double t = total_sensitivity_bound(model_.rho(), cfg_.assumed_alpha, static_cast<std::size_t>(nb));
    const int qdim = cfg_.query_dim > 0 ? cfg_.query_dim : cfg_.point_dim + 1;
    return sample_size(t, QuerySpec(cfg_.k, qdim), eps, cfg_.delta, cfg_.c_const);
  }

  // Smallest segment >= 64 that holds 2 m(eps_leaf) points, where
  // eps_leaf = eps / ceil(log2(n / segment)). Falls back to one level when no
  // segment up to n qualifies.
  void calibrate() {
    const auto fit = [&](long long seg) {
      const double ratio = static_cast<double>(cfg_.n) / static_cast<double>(seg);
      levels_ = std::max(1, static_cast<int>(std::ceil(std::log2(std::max(ratio, 1.0)))));
      eps_leaf_ = cfg_.eps / levels_;
      m_leaf_ = sample_size_at(eps_leaf_, 2 * seg);
      return seg >= 2 * m_leaf_;
    };
    if (cfg_.segment_size) {
      fit(*cfg_.segment_size);
      segment_size_ = *cfg_.segment_size;
      return;
    }
    for (long long seg = 64; seg <= std::max(cfg_.n, 64LL); ++seg) {
      if (fit(seg)) {
        segment_size_ = seg;
        return;
      }
    }
    long long seg = std::max(cfg_.n, 64LL);
    while (!fit(seg)) seg = 2 * m_leaf_;
    segment_size_ = seg;
  }

  void carry(Bucket b) {
    std::size_t level = 0;
    while (level < buckets_.size() && buckets_[level]) {
      Bucket other = std::move(*buckets_[level]);
      buckets_[level].reset();
      b = reduce(std::move(other), std::move(b));
      ++level;
    }
    if (level == buckets_.size()) buckets_.emplace_back();
    buckets_[level] = std::move(b);
  }

  Bucket reduce(Bucket a, Bucket b) {
    Bucket out;
    out.weight = a.weight + b.weight;
    out.points = a.points + b.points;
    out.accuracy = std::max(a.accuracy, b.accuracy) + eps_leaf_;
    WeightedSet merged = std::move(a.sample.set);
    merged.append(b.sample.set);
    peak_ = std::max(peak_, stored_points() + merged.size());
    if (m_leaf_ >= static_cast<long long>(merged.size())) {
      out.sample.set = std::move(merged);
      out.sample.m = static_cast<long long>(out.sample.set.size());
    } else {
      const Assignment seed = dsquared_seed(model_, merged, cfg_.k, cfg_.oversample, rng_);
      out.sample = build_coreset(merged, seed, m_leaf_, rng_);
      out.sample.pr.clear();
      normalize_weight(out.sample, out.weight);
    }
    out.sample.provenance = Provenance::merge_reduce;
    return out;
  }

  void track() { peak_ = std::max(peak_, stored_points()); }

  CostModel model_;
  MergeReduceConfig cfg_;
  Rng rng_;
  long long segment_size_ = 64;
  double eps_leaf_ = 0.0;
  int levels_ = 1;
  long long m_leaf_ = 1;
  long long segments_ = 0;
  std::vector<std::optional<Bucket>> buckets_;
  WeightedSet pending_;
  std::size_t peak_ = 0;
};

}  // namespace coreset
