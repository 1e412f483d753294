#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "coreset/errors.hpp"
#include "coreset/metric.hpp"
#include "coreset/rng.hpp"
#include "coreset/weighted_set.hpp"

namespace coreset {

/// Snapshot look-back depth 2 + ceil(log_phi(rho*gamma / ((phi - rho) * eps))).
inline int lambda_phases(double rho, double phi, double gamma, double eps) {
  if (!(phi > rho)) throw DomainError("lambda_phases: phi must exceed rho");
  require(eps > 0.0 && eps < 1.0, "lambda_phases: eps must lie in (0,1)");
  require(gamma > 0.0, "lambda_phases: gamma must be positive");
  const double x = std::log(rho * gamma / ((phi - rho) * eps)) / std::log(phi);
  // Exact powers of phi must not round up.
  return 2 + static_cast<int>(std::ceil(x - 1e-9));
}

struct BicriterionParams {
  int k = 1;
  /// Upper bound on the stream length; enters through log2(n).
  long long n = 2;
  double phi = 0.0;
  double gamma = 0.0;
  int lambda = 2;
  bool record_moves = false;

  /// phi = 4 rho and gamma = max(8, 4 rho) unless overridden; lambda from eps.
  static BicriterionParams defaults(const CostModel& model, int k, long long n, double eps,
                                    std::optional<double> phi = std::nullopt,
                                    std::optional<double> gamma = std::nullopt) {
    BicriterionParams p;
    p.k = k;
    p.n = std::max(2LL, n);
    const double rho = model.rho();
    p.phi = phi.value_or(4.0 * rho);
    p.gamma = gamma.value_or(std::max(8.0, 4.0 * rho));
    p.lambda = lambda_phases(rho, p.phi, p.gamma, eps);
    return p;
  }

  [[nodiscard]] double log_factor() const { return 1.0 + std::log2(static_cast<double>(n)); }
  [[nodiscard]] double center_budget() const { return (gamma - 1.0) * log_factor() * k; }
};

struct MoveRecord {
  int phase;
  PointId from;
  PointId to;
  double weight;
  double cost;
};

/// What happened to a replayed (raised-flag) center: reopened (to == from) or moved.
struct ReplayEvent {
  PointId from;
  PointId to;
};

struct UpdateResult {
  /// B(x) for the fresh point, its location and D(x, B(x)).
  PointId center = 0;
  double dist = 0.0;
  bool opened = false;
  /// Phase in which x was assigned.
  int phase = 1;
  /// Phases completed during this call, in order.
  std::vector<int> ended_phases;
  /// Replayed centers processed during this call, in order.
  std::vector<ReplayEvent> replays;
  /// The live center set changed (a center opened, or a phase ended).
  bool centers_changed = false;
};

struct Snapshot {
  int phase = 0;
  double lower_bound = 0.0;
  WeightedSet summary;
};

/// Online bicriterion over an insertion-only stream. Points either open a center or
/// MOVE their weight onto the nearest live center; B(x) is fixed when x arrives.
/// A phase ends when the move cost exceeds gamma*L or there are too many centers; the
/// summary is then replayed (raised flags) under L <- phi*L.
class StreamBicriterion {
 public:
  StreamBicriterion(CostModel model, BicriterionParams params, Rng rng)
      : model_(std::move(model)), params_(params), rng_(rng) {
    require(params_.k >= 1, "bicriterion: k must be >= 1");
    require(params_.phi > model_.rho(), "bicriterion: phi must exceed rho");
    require(params_.gamma > 1.0, "bicriterion: gamma must exceed 1");
    require(params_.lambda >= 1, "bicriterion: lambda must be >= 1");
  }

  /// Number of distinct points needed before init (two when k = 1).
  [[nodiscard]] int init_size() const { return std::max(2, params_.k); }

  /// L_1 = min pairwise distance among the first distinct points.
  void init(const std::vector<Point>& first_distinct) {
    if (static_cast<int>(first_distinct.size()) < init_size())
      throw DomainError("bicriterion init: need " + std::to_string(init_size()) + " distinct points");
    double l = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < first_distinct.size(); ++i)
      for (std::size_t j = i + 1; j < first_distinct.size(); ++j) l = std::min(l, model_(first_distinct[i], first_distinct[j]));
    if (!(l > 0.0) || !std::isfinite(l)) throw DomainError("bicriterion init: distinct points at zero distance");
    lower_bound_ = l;
    initialized_ = true;
    phase_ = 1;
    phase_cost_ = 0.0;
    lower_bounds_.assign(1, l);
  }

  [[nodiscard]] bool initialized() const { return initialized_; }

  UpdateResult update(const Point& x, double w) {
    if (!initialized_) throw DomainError("bicriterion: update before init");
    require(w >= 0.0 && std::isfinite(w), "bicriterion: weight must be finite and nonnegative");
    UpdateResult result;
    ingested_ += w;
    step(Item{x, w, false}, result);
    while (!queue_.empty()) {
      Item item = std::move(queue_.front());
      queue_.pop_front();
      step(std::move(item), result);
    }
    peak_stored_ = std::max(peak_stored_, stored_points());
    return result;
  }

  /// Sum of K over completed phases 1..j: an Earth-Mover bound between the prefix
  /// R_j and the snapshot M_j.
  [[nodiscard]] double emd_budget(int j) const {
    if (j < 0 || j >= phase_) throw DomainError("emd_budget: phase " + std::to_string(j) + " is not complete");
    double s = 0.0;
    for (int l = 0; l < j; ++l) s += phase_costs_[static_cast<std::size_t>(l)];
    return s;
  }

  [[nodiscard]] int phase() const { return phase_; }
  [[nodiscard]] double lower_bound() const { return lower_bound_; }
  [[nodiscard]] double phase_cost() const { return phase_cost_; }
  /// L_1, L_2, ... for every phase started so far.
  [[nodiscard]] const std::vector<double>& lower_bounds() const { return lower_bounds_; }
  /// Final K_j of every completed phase.
  [[nodiscard]] const std::vector<double>& phase_costs() const { return phase_costs_; }
  [[nodiscard]] double total_move_cost() const {
    double s = phase_cost_;
    for (double k : phase_costs_) s += k;
    return s;
  }
  [[nodiscard]] const std::vector<MoveRecord>& moves() const { return moves_; }
  [[nodiscard]] const BicriterionParams& params() const { return params_; }
  [[nodiscard]] const CostModel& model() const { return model_; }

  [[nodiscard]] const std::vector<Point>& live_points() const { return live_points_; }
  [[nodiscard]] const std::vector<double>& live_weights() const { return live_weights_; }
  [[nodiscard]] const std::vector<char>& live_flags() const { return live_flags_; }
  [[nodiscard]] std::size_t queue_size() const { return queue_.size(); }
  [[nodiscard]] double ingested_weight() const { return ingested_; }

  /// Retained snapshots, oldest first (at most lambda + 1).
  [[nodiscard]] const std::deque<Snapshot>& snapshots() const { return snapshots_; }

  /// Snapshot M_j if still retained.
  [[nodiscard]] const Snapshot* snapshot(int j) const {
    for (const auto& s : snapshots_)
      if (s.phase == j) return &s;
    return nullptr;
  }

  /// Live centers plus pending replays plus retained snapshots.
  [[nodiscard]] std::size_t stored_points() const {
    std::size_t n = live_points_.size() + queue_.size();
    for (const auto& s : snapshots_) n += s.summary.size();
    return n;
  }
  [[nodiscard]] std::size_t peak_stored() const { return peak_stored_; }

  /// Weighted live centers.
  [[nodiscard]] WeightedSet live_set() const {
    WeightedSet s;
    s.points = live_points_;
    s.weights = live_weights_;
    return s;
  }

 private:
  struct Item {
    Point p;
    double w;
    bool flag;
  };

  void step(Item item, UpdateResult& result) {
    const bool fresh = !item.flag;
    bool open = live_points_.empty();
    std::size_t y = 0;
    double d = 0.0;
    if (!open) {
      const Nearest nb = dist_to_set(model_, item.p, live_points_);
      y = nb.index;
      d = nb.dist;
      const double scale = lower_bound_ / (params_.k * params_.log_factor());
      const double prob = std::min(item.w * d / scale, 1.0);
      open = rng_.uniform() < prob;
    }
    if (open) {
      if (fresh) {
        result.center = item.p.id();
        result.dist = 0.0;
        result.opened = true;
        result.phase = phase_;
      } else {
        result.replays.push_back({item.p.id(), item.p.id()});
      }
      live_points_.push_back(item.p);
      live_weights_.push_back(item.w);
      live_flags_.push_back(item.flag ? 1 : 0);
      result.centers_changed = true;
    } else {
      const double cost = item.w * d;
      phase_cost_ += cost;
      live_weights_[y] += item.w;
      if (params_.record_moves) moves_.push_back({phase_, item.p.id(), live_points_[y].id(), item.w, cost});
      if (fresh) {
        result.center = live_points_[y].id();
        result.dist = d;
        result.opened = false;
        result.phase = phase_;
      } else {
        result.replays.push_back({item.p.id(), live_points_[y].id()});
      }
    }
    if (phase_cost_ > params_.gamma * lower_bound_ ||
        static_cast<double>(live_points_.size()) > params_.center_budget()) {
      end_phase(result);
    }
  }

  void end_phase(UpdateResult& result) {
    // The summary of R_i is the live set plus replays still pending from earlier phases.
    Snapshot snap;
    snap.phase = phase_;
    snap.lower_bound = lower_bound_;
    for (std::size_t b = 0; b < live_points_.size(); ++b) snap.summary.push_back(live_points_[b], live_weights_[b]);
    for (const auto& item : queue_) snap.summary.push_back(item.p, item.w);
    snapshots_.push_back(std::move(snap));
    while (static_cast<int>(snapshots_.size()) > params_.lambda + 1) snapshots_.pop_front();

    // Push (B,u) in front of the next item to read, flags raised.
    for (std::size_t b = live_points_.size(); b-- > 0;) queue_.push_front(Item{live_points_[b], live_weights_[b], true});
    live_points_.clear();
    live_weights_.clear();
    live_flags_.clear();
    phase_costs_.push_back(phase_cost_);
    phase_cost_ = 0.0;
    lower_bound_ *= params_.phi;
    lower_bounds_.push_back(lower_bound_);
    result.ended_phases.push_back(phase_);
    result.centers_changed = true;
    ++phase_;
  }

  CostModel model_;
  BicriterionParams params_;
  Rng rng_;
  bool initialized_ = false;
  int phase_ = 1;
  double lower_bound_ = 0.0;
  double phase_cost_ = 0.0;
  double ingested_ = 0.0;
  std::vector<double> lower_bounds_;
  std::vector<double> phase_costs_;
  std::vector<Point> live_points_;
  std::vector<double> live_weights_;
  std::vector<char> live_flags_;
  std::deque<Item> queue_;
  std::deque<Snapshot> snapshots_;
  std::vector<MoveRecord> moves_;
  std::size_t peak_stored_ = 0;
};

}  // namespace coreset
