#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <optional>
#include <vector>

#include "coreset/bicriterion.hpp"
#include "coreset/coreset.hpp"
#include "coreset/errors.hpp"
#include "coreset/metric.hpp"
#include "coreset/rng.hpp"
#include "coreset/stream_bicriterion.hpp"
#include "coreset/stream_sampler.hpp"
#include "coreset/weighted_set.hpp"

namespace coreset {

struct StreamConfig {
  int k = 3;
  /// Stream-length bound.
  long long n = 1000;
  double eps = 0.2;
  double delta = 0.1;
  double c_const = 1.0;
  Schedule schedule = Schedule::sensitivity;
  std::optional<double> phi;
  std::optional<double> gamma;
  /// Approximation factor of the solver that turns the live centers into C.
  double gamma_offline = 5.0;
  /// Overrides the default alpha_bar of the sensitivity schedule.
  std::optional<double> alpha_bar;
  /// Expected sample size of the algorithm1 schedule; default x_scale * t' at the
  /// sensitivity schedule's t'.
  std::optional<double> sample_budget;
  bool refresh_every_point = false;
  bool literal_l_line = false;
  bool record_moves = false;
};

/// Online bicriterion, threshold sampler(s) and the pre-init buffer, driven point by
/// point. The current coreset can be read after any insert.
class StreamingCoreset {
 public:
  StreamingCoreset(CostModel model, StreamConfig cfg, Rng rng)
      : model_(std::move(model)),
        cfg_(cfg),
        rng_(rng),
        bic_(model_, bicriterion_params(model_, cfg), rng.split(1)) {
    require(cfg.k >= 1, "stream: k must be >= 1");
    require(cfg.eps > 0.0 && cfg.eps < 1.0, "stream: eps must lie in (0,1)");
    require(cfg.delta > 0.0 && cfg.delta < 1.0, "stream: delta must lie in (0,1)");
    require(cfg.c_const > 0.0, "stream: c must be positive");
    const auto& bp = bic_.params();
    const double rho = model_.rho();
    const double online_alpha = rho * bp.phi * bp.gamma / (bp.phi - rho);
    alpha_bar_ = cfg.alpha_bar.value_or(composed_alpha(rho, online_alpha, cfg.gamma_offline));
    sens_params_ = SamplerParams::sensitivity_schedule(cfg.k, bp.n, cfg.eps, cfg.delta, cfg.c_const, rho, alpha_bar_);
    sens_params_.refresh_every_point = cfg.refresh_every_point;
    sens_params_.literal_l_line = cfg.literal_l_line;
  }

  void insert(const Point& x, double w) {
    require(w >= 0.0 && std::isfinite(w), "stream: weight must be finite and nonnegative");
    if (!bic_.initialized()) {
      buffer_.push_back(x, w);
      if (std::none_of(distinct_.begin(), distinct_.end(), [&](const Point& q) { return q.same_location(x); }))
        distinct_.push_back(x);
      if (static_cast<int>(distinct_.size()) >= bic_.init_size()) {
        bic_.init(distinct_);
        WeightedSet pending = std::move(buffer_);
        buffer_ = WeightedSet{};
        distinct_.clear();
        for (std::size_t i = 0; i < pending.size(); ++i) process(pending.points[i], pending.weights[i]);
      }
    } else {
      process(x, w);
    }
    weight_ += w;
    ++count_;
    peak_ = std::max(peak_, stored_points());
  }

  /// Coreset of everything inserted so far.
  [[nodiscard]] CoresetSample coreset() const {
    if (!bic_.initialized()) {
      if (buffer_.empty()) throw DomainError("stream: no points inserted");
      CoresetSample out;
      out.provenance = Provenance::streaming;
      out.set = buffer_;
      out.m = static_cast<long long>(buffer_.size());
      return out;
    }
    if (cfg_.schedule == Schedule::sensitivity) {
      const CoresetSample s = samplers_.front().emit();
      return assemble(nullptr, 1, &s);
    }
    const int j = bic_.phase() - bic_.params().lambda;
    const Snapshot* snap = nullptr;
    if (j >= 1) {
      snap = bic_.snapshot(j);
      ensure(snap != nullptr, "stream: snapshot " + std::to_string(j) + " was dropped");
    }
    const int start = snap ? snap->phase + 1 : 1;
    const ThresholdSampler* sampler = sampler_from(start);
    ensure(sampler != nullptr, "stream: no sampler starts at phase " + std::to_string(start));
    if (sampler->size() == 0) return assemble(snap, start, nullptr);
    const CoresetSample s = sampler->emit();
    return assemble(snap, start, &s);
  }

  [[nodiscard]] bool degenerate() const { return !bic_.initialized(); }
  [[nodiscard]] const StreamBicriterion& bicriterion() const { return bic_; }
  [[nodiscard]] const std::deque<ThresholdSampler>& samplers() const { return samplers_; }
  [[nodiscard]] double alpha_bar() const { return alpha_bar_; }
  [[nodiscard]] const SamplerParams& sensitivity_params() const { return sens_params_; }
  [[nodiscard]] double weight() const { return weight_; }
  [[nodiscard]] long long count() const { return count_; }
  [[nodiscard]] const StreamConfig& config() const { return cfg_; }

  /// t' in effect for the chosen schedule.
  [[nodiscard]] double t_prime() const {
    return cfg_.schedule == Schedule::sensitivity ? sens_params_.t_prime : 1.0;
  }
  [[nodiscard]] double x_scale() const {
    return cfg_.schedule == Schedule::sensitivity ? sens_params_.x_scale : algorithm1_budget();
  }

  /// Expected sample size for the algorithm1 schedule.
  [[nodiscard]] double algorithm1_budget() const {
    return cfg_.sample_budget.value_or(sens_params_.x_scale * sens_params_.t_prime);
  }

  /// Storage bound: x_scale * t' per live sampler, plus the bicriterion's live
  /// centers, a full replay queue and lambda + 1 snapshots.
  [[nodiscard]] double predicted_budget() const {
    const auto& bp = bic_.params();
    const double centers = std::floor(bp.center_budget()) + 1.0;
    const double samplers = cfg_.schedule == Schedule::sensitivity ? 1.0 : static_cast<double>(bp.lambda);
    return samplers * x_scale() * t_prime() + centers * (bp.lambda + 3.0) + bic_.init_size();
  }

  /// Points currently held: buffer, bicriterion structures and retained samples.
  [[nodiscard]] std::size_t stored_points() const {
    std::size_t n = buffer_.size() + distinct_.size() + bic_.stored_points();
    for (const auto& s : samplers_) n += s.size();
    return n;
  }
  [[nodiscard]] std::size_t peak_stored() const { return peak_; }

 private:
  static BicriterionParams bicriterion_params(const CostModel& model, const StreamConfig& cfg) {
    auto p = BicriterionParams::defaults(model, cfg.k, cfg.n, cfg.eps, cfg.phi, cfg.gamma);
    p.record_moves = cfg.record_moves;
    return p;
  }

  [[nodiscard]] const ThresholdSampler* sampler_from(int start) const {
    for (const auto& s : samplers_)
      if (s.params().start_phase == start) return &s;
    return nullptr;
  }

  void start_sampler(int phase) {
    SamplerParams p;
    if (cfg_.schedule == Schedule::sensitivity) {
      p = sens_params_;
    } else {
      p = SamplerParams::algorithm1_schedule(cfg_.k, bic_.params().n, cfg_.eps, cfg_.delta, model_.rho(),
                                             algorithm1_budget());
    }
    p.start_phase = phase;
    samplers_.emplace_back(model_, p, rng_.split(2 + static_cast<std::uint64_t>(phase)));
  }

  void process(const Point& x, double w) {
    if (samplers_.empty()) start_sampler(1);
    const UpdateResult r = bic_.update(x, w);
    for (auto& s : samplers_) s.ingest(x, w, r, bic_);
    if (cfg_.schedule == Schedule::algorithm1 && !r.ended_phases.empty()) {
      for (int e : r.ended_phases) start_sampler(e + 1);
      const int keep_from = std::max(1, bic_.phase() - bic_.params().lambda + 1);
      while (!samplers_.empty() && samplers_.front().params().start_phase < keep_from) samplers_.pop_front();
    }
  }

  CostModel model_;
  StreamConfig cfg_;
  Rng rng_;
  StreamBicriterion bic_;
  double alpha_bar_ = 1.0;
  SamplerParams sens_params_;
  std::deque<ThresholdSampler> samplers_;
  WeightedSet buffer_;
  std::vector<Point> distinct_;
  double weight_ = 0.0;
  long long count_ = 0;
  std::size_t peak_ = 0;
};

}  // namespace coreset
