#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "coreset/errors.hpp"

namespace coreset {

using PointId = std::int64_t;

struct SparseEntry {
  std::uint32_t index;
  double value;
  friend bool operator==(const SparseEntry&, const SparseEntry&) = default;
};

/// A point of the input domain: dense coordinates or sorted (index, value) pairs.
class Point {
 public:
  Point() = default;

  static Point dense(PointId id, std::vector<double> coords) {
    Point p;
    p.id_ = id;
    p.values_ = std::move(coords);
    return p;
  }

  /// Entries must have strictly increasing indices; explicit zeros are dropped.
  static Point sparse(PointId id, const std::vector<SparseEntry>& entries) {
    Point p;
    p.id_ = id;
    p.sparse_ = true;
    for (std::size_t i = 0; i < entries.size(); ++i) {
      if (i > 0 && entries[i].index <= entries[i - 1].index)
        throw DomainError("sparse point " + std::to_string(id) + ": indices not strictly increasing");
      if (entries[i].value == 0.0) continue;
      p.indices_.push_back(entries[i].index);
      p.values_.push_back(entries[i].value);
    }
    return p;
  }

  [[nodiscard]] PointId id() const { return id_; }
  void set_id(PointId id) { id_ = id; }
  [[nodiscard]] bool is_sparse() const { return sparse_; }
  [[nodiscard]] std::span<const double> values() const { return values_; }
  [[nodiscard]] std::span<const std::uint32_t> indices() const { return indices_; }

  /// Dense length, or one past the largest stored sparse index.
  [[nodiscard]] std::size_t dim() const {
    if (!sparse_) return values_.size();
    return indices_.empty() ? 0 : static_cast<std::size_t>(indices_.back()) + 1;
  }

  /// Dense copy padded with zeros to at least `d` coordinates.
  [[nodiscard]] std::vector<double> to_dense(std::size_t d) const {
    std::vector<double> out(std::max(d, dim()), 0.0);
    if (!sparse_) {
      std::copy(values_.begin(), values_.end(), out.begin());
    } else {
      for (std::size_t i = 0; i < indices_.size(); ++i) out[indices_[i]] = values_[i];
    }
    return out;
  }

  /// Same location (ids are ignored).
  [[nodiscard]] bool same_location(const Point& o) const {
    if (sparse_ == o.sparse_) return values_ == o.values_ && indices_ == o.indices_;
    return to_dense(o.dim()) == o.to_dense(dim());
  }

 private:
  PointId id_ = 0;
  bool sparse_ = false;
  std::vector<double> values_;
  std::vector<std::uint32_t> indices_;
};

/// Squared Euclidean distance; sparse and dense forms may be mixed.
inline double squared_euclidean(const Point& x, const Point& y) {
  const auto xv = x.values();
  const auto yv = y.values();
  if (!x.is_sparse() && !y.is_sparse()) {
    if (xv.size() != yv.size())
      throw DomainError("dimension mismatch: " + std::to_string(xv.size()) + " vs " +
                        std::to_string(yv.size()));
    double s = 0.0;
    for (std::size_t i = 0; i < xv.size(); ++i) {
      const double d = xv[i] - yv[i];
      s += d * d;
    }
    return s;
  }
  if (x.is_sparse() && y.is_sparse()) {
    const auto xi = x.indices();
    const auto yi = y.indices();
    double s = 0.0;
    std::size_t a = 0, b = 0;
    while (a < xi.size() || b < yi.size()) {
      if (b == yi.size() || (a < xi.size() && xi[a] < yi[b])) {
        s += xv[a] * xv[a];
        ++a;
      } else if (a == xi.size() || yi[b] < xi[a]) {
        s += yv[b] * yv[b];
        ++b;
      } else {
        const double d = xv[a] - yv[b];
        s += d * d;
        ++a;
        ++b;
      }
    }
    return s;
  }
  const Point& dn = x.is_sparse() ? y : x;
  const Point& sp = x.is_sparse() ? x : y;
  const auto dv = dn.values();
  const auto si = sp.indices();
  const auto sv = sp.values();
  if (!si.empty() && si.back() >= dv.size())
    throw DomainError("sparse index " + std::to_string(si.back()) + " exceeds dense dimension " +
                      std::to_string(dv.size()));
  double s = 0.0;
  std::size_t j = 0;
  for (std::size_t i = 0; i < dv.size(); ++i) {
    double d = dv[i];
    if (j < si.size() && si[j] == i) d -= sv[j++];
    s += d * d;
  }
  return s;
}

/// Symmetric distance table for finite metrics, indexed by point id in [0, size).
class DistanceTable {
 public:
  explicit DistanceTable(std::size_t n) : n_(n), d_(n * n, 0.0) {}

  static DistanceTable from_matrix(const std::vector<std::vector<double>>& m) {
    DistanceTable t(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (m[i].size() != m.size()) throw DomainError("distance table must be square");
      for (std::size_t j = 0; j < m.size(); ++j) {
        if (!(m[i][j] >= 0.0) || m[i][j] != m[j][i]) throw DomainError("distance table must be symmetric and nonnegative");
        t.d_[i * t.n_ + j] = m[i][j];
      }
      if (m[i][i] != 0.0) throw DomainError("distance table must be zero on the diagonal");
    }
    return t;
  }

  [[nodiscard]] std::size_t size() const { return n_; }

  [[nodiscard]] double at(PointId a, PointId b) const {
    if (a < 0 || b < 0 || static_cast<std::size_t>(a) >= n_ || static_cast<std::size_t>(b) >= n_)
      throw DomainError("point id outside the distance table");
    return d_[static_cast<std::size_t>(a) * n_ + static_cast<std::size_t>(b)];
  }

 private:
  std::size_t n_;
  std::vector<double> d_;
};

enum class Loss { kmedian, kmeans, lp, huber, cauchy, tukey, custom };

/// D(x,y) = f(dist(x,y)) for a monotone Log-Log-Lipschitz transform f of
/// exponent r over a base metric. rho = max(2^(r-1), 1). Immutable.
class CostModel {
 public:
  static CostModel kmedian() { return CostModel(Loss::kmedian, 0.0, 1.0); }
  static CostModel kmeans() { return CostModel(Loss::kmeans, 0.0, 2.0); }

  /// dist^p; p >= 1.
  static CostModel lp(double p) {
    require(p >= 1.0 && std::isfinite(p), "lp exponent must be >= 1");
    return CostModel(Loss::lp, p, p);
  }
  // The M-estimators are quadratic near zero, so r = 2 bounds their growth.
  static CostModel huber(double c) { return scaled(Loss::huber, c); }
  static CostModel cauchy(double c) { return scaled(Loss::cauchy, c); }
  static CostModel tukey(double c) { return scaled(Loss::tukey, c); }

  /// User-supplied transform. The caller vouches for monotonicity and exponent r.
  static CostModel custom(std::string name, std::function<double(double)> f, double r) {
    require(r > 0.0, "Log-Log-Lipschitz exponent must be positive");
    CostModel m(Loss::custom, 0.0, r);
    m.custom_name_ = std::move(name);
    m.custom_ = std::make_shared<const std::function<double(double)>>(std::move(f));
    return m;
  }

  /// Parses "kmedian", "kmeans", "lp:<p>", "huber:<c>", "cauchy:<c>", "tukey:<c>".
  static CostModel parse(const std::string& spec) {
    const auto colon = spec.find(':');
    const std::string head = spec.substr(0, colon);
    double arg = 1.0;
    if (colon != std::string::npos) {
      try {
        std::size_t used = 0;
        arg = std::stod(spec.substr(colon + 1), &used);
        if (used != spec.size() - colon - 1) throw std::invalid_argument(spec);
      } catch (const std::exception&) {
        throw DomainError("bad model parameter in '" + spec + "'");
      }
    }
    if (head == "kmedian") return kmedian();
    if (head == "kmeans") return kmeans();
    if (head == "lp") return lp(colon == std::string::npos ? 2.0 : arg);
    if (head == "huber") return huber(arg);
    if (head == "cauchy") return cauchy(arg);
    if (head == "tukey") return tukey(arg);
    throw DomainError("unknown model '" + spec + "'");
  }

  /// Same transform over a finite metric given as a table indexed by point id.
  [[nodiscard]] CostModel with_table(std::shared_ptr<const DistanceTable> table) const {
    CostModel m = *this;
    m.table_ = std::move(table);
    return m;
  }

  [[nodiscard]] Loss loss() const { return loss_; }
  [[nodiscard]] double param() const { return param_; }
  [[nodiscard]] double lll_exponent() const { return r_; }
  [[nodiscard]] double rho() const { return std::max(std::pow(2.0, r_ - 1.0), 1.0); }
  [[nodiscard]] bool has_table() const { return table_ != nullptr; }
  [[nodiscard]] const DistanceTable* table() const { return table_.get(); }

  /// Squared Euclidean cost, where the weighted centroid is the exact 1-center.
  [[nodiscard]] bool is_euclidean_kmeans() const { return loss_ == Loss::kmeans && !table_; }

  [[nodiscard]] std::string name() const {
    auto num = [](double v) {
      std::string s = std::to_string(v);
      s.erase(s.find_last_not_of('0') + 1);
      if (!s.empty() && s.back() == '.') s.pop_back();
      return s;
    };
    switch (loss_) {
      case Loss::kmedian: return "kmedian";
      case Loss::kmeans: return "kmeans";
      case Loss::lp: return "lp:" + num(param_);
      case Loss::huber: return "huber:" + num(param_);
      case Loss::cauchy: return "cauchy:" + num(param_);
      case Loss::tukey: return "tukey:" + num(param_);
      case Loss::custom: return custom_name_;
    }
    return "?";
  }

  /// The monotone transform applied to base distances.
  [[nodiscard]] double transform(double t) const {
    switch (loss_) {
      case Loss::kmedian: return t;
      case Loss::kmeans: return t * t;
      case Loss::lp: return std::pow(t, param_);
      case Loss::huber: return t <= param_ ? 0.5 * t * t : param_ * (t - 0.5 * param_);
      case Loss::cauchy: return 0.5 * param_ * param_ * std::log1p((t / param_) * (t / param_));
      case Loss::tukey: {
        if (t >= param_) return param_ * param_ / 6.0;
        const double u = 1.0 - (t / param_) * (t / param_);
        return param_ * param_ / 6.0 * (1.0 - u * u * u);
      }
      case Loss::custom: return (*custom_)(t);
    }
    return t;
  }

  [[nodiscard]] double base_distance(const Point& x, const Point& y) const {
    if (table_) return table_->at(x.id(), y.id());
    return std::sqrt(squared_euclidean(x, y));
  }

  [[nodiscard]] double operator()(const Point& x, const Point& y) const {
    if (loss_ == Loss::kmeans && !table_) return squared_euclidean(x, y);
    return transform(base_distance(x, y));
  }

 private:
  CostModel(Loss loss, double param, double r) : loss_(loss), param_(param), r_(r) {}

  static CostModel scaled(Loss loss, double c) {
    require(c > 0.0 && std::isfinite(c), "M-estimator scale must be positive");
    return CostModel(loss, c, 2.0);
  }

  Loss loss_;
  double param_;
  double r_;
  std::shared_ptr<const DistanceTable> table_;
  std::shared_ptr<const std::function<double(double)>> custom_;
  std::string custom_name_;
};

inline double distance(const CostModel& model, const Point& x, const Point& y) { return model(x, y); }

struct Nearest {
  double dist = std::numeric_limits<double>::infinity();
  PointId id = 0;
  std::size_t index = 0;
};

/// min over centers of D(x,c); ties go to the smallest center id.
inline Nearest dist_to_set(const CostModel& model, const Point& x, std::span<const Point> centers) {
  if (centers.empty()) throw DomainError("dist_to_set: empty center set");
  Nearest best;
  for (std::size_t i = 0; i < centers.size(); ++i) {
    const double d = model(x, centers[i]);
    if (d < best.dist || (d == best.dist && centers[i].id() < best.id)) best = {d, centers[i].id(), i};
  }
  return best;
}

/// (r/eps)^r: the multiplier on D(x,y) in |D(x,z) - D(y,z)| <= psi*D(x,y) + eps*D(y,z).
inline double psi(const CostModel& model, double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("psi: eps must lie in (0,1)");
  return std::pow(model.lll_exponent() / eps, model.lll_exponent());
}

}  // namespace coreset
