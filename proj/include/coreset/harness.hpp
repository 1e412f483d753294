#pragma once

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "coreset/bicriterion.hpp"
#include "coreset/coreset.hpp"
#include "coreset/errors.hpp"
#include "coreset/merge_reduce.hpp"
#include "coreset/metric.hpp"
#include "coreset/rng.hpp"
#include "coreset/solvers.hpp"
#include "coreset/streaming.hpp"
#include "coreset/weighted_set.hpp"

namespace coreset {

enum class Format { csv, sparse };
enum class Mode { offline, stream, mergereduce };

inline std::string to_string(Format f) { return f == Format::csv ? "csv" : "sparse"; }

inline std::string to_string(Mode m) {
  switch (m) {
    case Mode::offline: return "offline";
    case Mode::stream: return "stream";
    case Mode::mergereduce: return "mergereduce";
  }
  return "?";
}

inline Format parse_format(const std::string& s) {
  if (s == "csv") return Format::csv;
  if (s == "sparse") return Format::sparse;
  throw ConfigError("unknown format '" + s + "'");
}

inline Mode parse_mode(const std::string& s) {
  if (s == "offline") return Mode::offline;
  if (s == "stream") return Mode::stream;
  if (s == "mergereduce") return Mode::mergereduce;
  throw ConfigError("unknown mode '" + s + "'");
}

struct ExperimentConfig {
  std::string input;
  Format format = Format::csv;
  /// First column of every row is the point weight.
  bool weighted = false;
  /// Skip the first line of a CSV file.
  bool header = false;
  std::string model = "kmeans";
  int k = 3;
  double eps = 0.2;
  double delta = 0.1;
  double c_const = 1.0;
  Mode mode = Mode::offline;
  Schedule schedule = Schedule::sensitivity;
  std::optional<double> phi;
  std::optional<double> gamma;
  std::optional<std::uint64_t> seed;
  int query_count = 50;
  std::string output;
  /// Stream-length bound; 0 means the number of input points.
  long long n = 0;
  /// Approximation factor assumed for the offline bicriterion when computing t'.
  double alpha = 8.0;
  int oversample = 2;
  double gamma_offline = 5.0;
  std::optional<double> alpha_bar;
  std::optional<double> sample_budget;
  std::optional<long long> segment_size;
  int prefixes = 10;
  bool timings = false;

  void validate() const {
    if (!(eps > 0.0 && eps < 1.0)) throw ConfigError("eps must lie in (0,1)");
    if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must lie in (0,1)");
    if (k < 1) throw ConfigError("k must be >= 1");
    if (!(c_const > 0.0)) throw ConfigError("c must be positive");
    if (!seed) throw ConfigError("a seed is required (flag or COR_SEED)");
    if (query_count < 1) throw ConfigError("query count must be >= 1");
    if (prefixes < 1) throw ConfigError("prefix count must be >= 1");
    if (!(alpha > 0.0)) throw ConfigError("alpha must be positive");
    if (oversample < 1) throw ConfigError("oversample must be >= 1");
    if (phi && !(*phi > 0.0)) throw ConfigError("phi must be positive");
    if (gamma && !(*gamma > 1.0)) throw ConfigError("gamma must exceed 1");
  }

  [[nodiscard]] CostModel cost_model() const {
    try {
      return CostModel::parse(model);
    } catch (const DomainError& e) {
      throw ConfigError(e.what());
    }
  }
};

inline nlohmann::json to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["input"] = c.input;
  j["format"] = to_string(c.format);
  j["weighted"] = c.weighted;
  j["header"] = c.header;
  j["model"] = c.model;
  j["k"] = c.k;
  j["eps"] = c.eps;
  j["delta"] = c.delta;
  j["c"] = c.c_const;
  j["mode"] = to_string(c.mode);
  j["schedule"] = to_string(c.schedule);
  j["phi"] = c.phi ? nlohmann::json(*c.phi) : nlohmann::json(nullptr);
  j["gamma"] = c.gamma ? nlohmann::json(*c.gamma) : nlohmann::json(nullptr);
  j["seed"] = c.seed ? nlohmann::json(*c.seed) : nlohmann::json(nullptr);
  j["queries"] = c.query_count;
  j["n"] = c.n;
  j["alpha"] = c.alpha;
  j["oversample"] = c.oversample;
  j["gamma_offline"] = c.gamma_offline;
  j["alpha_bar"] = c.alpha_bar ? nlohmann::json(*c.alpha_bar) : nlohmann::json(nullptr);
  j["sample_budget"] = c.sample_budget ? nlohmann::json(*c.sample_budget) : nlohmann::json(nullptr);
  j["segment_size"] = c.segment_size ? nlohmann::json(*c.segment_size) : nlohmann::json(nullptr);
  j["prefixes"] = c.prefixes;
  return j;
}

// ---------------------------------------------------------------- input

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline double parse_number(std::string_view s, long long row, const char* what) {
  s = trim(s);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = trim(s.substr(1, s.size() - 2));
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || end != s.data() + s.size())
    throw DataError("row " + std::to_string(row) + ": cannot parse " + what + " '" + std::string(s) + "'");
  if (!std::isfinite(v)) throw DataError("row " + std::to_string(row) + ": " + what + " is not finite");
  return v;
}

inline double parse_weight(std::string_view s, long long row) {
  const double w = parse_number(s, row, "weight");
  if (w < 0.0) throw DataError("row " + std::to_string(row) + ": negative weight");
  return w;
}

inline std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

}  // namespace detail

/// Reads points in file order. Row numbers in errors are 1-based line numbers; ids
/// are 0-based positions in the stream. Blank lines are skipped.
inline WeightedSet read_points(std::istream& in, Format format, bool weighted, bool header = false) {
  WeightedSet out;
  std::string line;
  long long row = 0;
  std::size_t dim = 0;
  PointId next_id = 0;
  while (std::getline(in, line)) {
    ++row;
    if (header && row == 1 && format == Format::csv) continue;
    const std::string_view view = detail::trim(line);
    if (view.empty()) continue;
    double w = 1.0;
    if (format == Format::csv) {
      auto fields = detail::split(view, ',');
      std::size_t first = 0;
      if (weighted) {
        w = detail::parse_weight(fields[0], row);
        first = 1;
      }
      if (fields.size() <= first) throw DataError("row " + std::to_string(row) + ": no coordinates");
      std::vector<double> coords;
      coords.reserve(fields.size() - first);
      for (std::size_t f = first; f < fields.size(); ++f) coords.push_back(detail::parse_number(fields[f], row, "coordinate"));
      if (dim == 0) dim = coords.size();
      if (coords.size() != dim)
        throw DataError("row " + std::to_string(row) + ": expected " + std::to_string(dim) + " coordinates, got " +
                        std::to_string(coords.size()));
      out.push_back(Point::dense(next_id++, std::move(coords)), w);
    } else {
      auto tokens = detail::split_ws(view);
      std::size_t first = 0;
      if (weighted) {
        w = detail::parse_weight(tokens[0], row);
        first = 1;
      }
      std::vector<SparseEntry> entries;
      for (std::size_t t = first; t < tokens.size(); ++t) {
        const auto colon = tokens[t].find(':');
        if (colon == std::string_view::npos)
          throw DataError("row " + std::to_string(row) + ": expected index:value, got '" + std::string(tokens[t]) + "'");
        const std::string_view idx = tokens[t].substr(0, colon);
        std::size_t index = 0;
        const auto [end, ec] = std::from_chars(idx.data(), idx.data() + idx.size(), index);
        if (idx.empty() || ec != std::errc() || end != idx.data() + idx.size())
          throw DataError("row " + std::to_string(row) + ": bad index '" + std::string(idx) + "'");
        if (index > std::numeric_limits<std::uint32_t>::max())
          throw DataError("row " + std::to_string(row) + ": index " + std::string(idx) + " out of range");
        entries.push_back({static_cast<std::uint32_t>(index), detail::parse_number(tokens[t].substr(colon + 1), row, "value")});
      }
      try {
        out.push_back(Point::sparse(next_id++, std::move(entries)), w);
      } catch (const DomainError& e) {
        throw DataError("row " + std::to_string(row) + ": " + e.what());
      }
    }
  }
  return out;
}

inline WeightedSet ingest_stream(const std::string& path, Format format, bool weighted = false, bool header = false) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  return read_points(in, format, weighted, header);
}

/// Writes points in the input format with the weight as the first column, so the
/// output reads back with weighted = true.
inline void write_points(std::ostream& out, const WeightedSet& s, Format format, bool with_weight = true) {
  out << std::setprecision(17);
  for (std::size_t i = 0; i < s.size(); ++i) {
    const Point& p = s.points[i];
    if (format == Format::csv) {
      bool first = true;
      if (with_weight) {
        out << s.weights[i];
        first = false;
      }
      const auto dense = p.to_dense(p.dim());
      for (double v : dense) {
        if (!first) out << ',';
        out << v;
        first = false;
      }
    } else {
      bool first = true;
      if (with_weight) {
        out << s.weights[i];
        first = false;
      }
      if (p.is_sparse()) {
        for (std::size_t e = 0; e < p.indices().size(); ++e) {
          if (!first) out << ' ';
          out << p.indices()[e] << ':' << p.values()[e];
          first = false;
        }
      } else {
        for (std::size_t e = 0; e < p.values().size(); ++e) {
          if (p.values()[e] == 0.0) continue;
          if (!first) out << ' ';
          out << e << ':' << p.values()[e];
          first = false;
        }
      }
    }
    out << '\n';
  }
}

struct MixtureSpec {
  long long n = 1000;
  int dim = 2;
  int components = 4;
  /// Component means are uniform in [-box, box]^dim.
  double box = 10.0;
  double sigma = 1.0;
};

/// Gaussian mixture with equal component probabilities; ids 0..n-1, unit weights.
inline WeightedSet gaussian_mixture(const MixtureSpec& spec, Rng rng) {
  require(spec.n >= 1 && spec.dim >= 1 && spec.components >= 1, "mixture: n, dim and components must be >= 1");
  require(spec.sigma >= 0.0, "mixture: sigma must be nonnegative");
  Rng centers_rng = rng.split(1);
  Rng points_rng = rng.split(2);
  std::vector<std::vector<double>> means(static_cast<std::size_t>(spec.components), std::vector<double>(spec.dim));
  for (auto& m : means)
    for (auto& v : m) v = spec.box * (2.0 * centers_rng.uniform() - 1.0);
  WeightedSet out;
  out.points.reserve(static_cast<std::size_t>(spec.n));
  out.weights.reserve(static_cast<std::size_t>(spec.n));
  for (long long i = 0; i < spec.n; ++i) {
    const auto& m = means[points_rng.below(static_cast<std::uint64_t>(spec.components))];
    std::vector<double> x(m);
    for (auto& v : x) v += spec.sigma * points_rng.normal();
    out.push_back(Point::dense(i, std::move(x)), 1.0);
  }
  return out;
}

// ---------------------------------------------------------------- evaluation

struct QuerySet {
  std::vector<std::vector<Point>> queries;
  std::vector<std::string> kinds;
};

namespace detail {

inline Solution solver_reference(const CostModel& model, const WeightedSet& a, int k, Rng& rng) {
  // The swap search is quadratic; large non-kmeans inputs are subsampled.
  constexpr std::size_t cap = 1500;
  if (model.is_euclidean_kmeans() || a.size() <= cap) return solve(model, a, k, rng, 25);
  WeightedSet sub;
  for (std::size_t j = 0; j < cap; ++j) {
    const auto i = rng.below(a.size());
    Point q = a.points[i];
    q.set_id(static_cast<PointId>(j));
    sub.push_back(std::move(q), a.weights[i]);
  }
  return solve(model, sub, k, rng, 25);
}

}  // namespace detail

/// Solver outputs on P and on S, then alternating uniform k-subsets of P and
/// uniform random centers in P's bounding box (k-subsets only for sparse input).
inline QuerySet make_queries(const CostModel& model, const WeightedSet& p, const WeightedSet& s, int k, int count,
                             Rng rng) {
  require(!p.empty(), "queries: empty input");
  require(count >= 1, "queries: count must be >= 1");
  QuerySet out;
  Rng solver_rng = rng.split(1);
  Rng subset_rng = rng.split(2);
  Rng box_rng = rng.split(3);
  out.queries.push_back(detail::solver_reference(model, p, k, solver_rng).centers);
  out.kinds.push_back("solver_on_input");
  if (count >= 2 && !s.empty()) {
    out.queries.push_back(detail::solver_reference(model, s, k, solver_rng).centers);
    out.kinds.push_back("solver_on_coreset");
  }
  bool dense = true;
  std::size_t dim = 0;
  for (const auto& q : p.points) {
    dense = dense && !q.is_sparse();
    dim = std::max(dim, q.dim());
  }
  std::vector<double> lo(dim, std::numeric_limits<double>::infinity()), hi(dim, -std::numeric_limits<double>::infinity());
  if (dense && !model.has_table()) {
    for (const auto& q : p.points)
      for (std::size_t d = 0; d < dim; ++d) {
        lo[d] = std::min(lo[d], q.values()[d]);
        hi[d] = std::max(hi[d], q.values()[d]);
      }
  }
  const bool boxes = dense && !model.has_table();
  for (int j = 0; static_cast<int>(out.queries.size()) < count; ++j) {
    std::vector<Point> c;
    if (j % 2 == 0 || !boxes) {
      for (int t = 0; t < k; ++t) c.push_back(p.points[subset_rng.below(p.size())]);
      out.kinds.push_back("random_subset");
    } else {
      for (int t = 0; t < k; ++t) {
        std::vector<double> x(dim);
        for (std::size_t d = 0; d < dim; ++d) x[d] = lo[d] + (hi[d] - lo[d]) * box_rng.uniform();
        c.push_back(Point::dense(-1 - t, std::move(x)));
      }
      out.kinds.push_back("random_box");
    }
    out.queries.push_back(std::move(c));
  }
  return out;
}

struct QualityReport {
  int schema = 1;
  std::string mode;
  std::vector<double> errors;
  std::vector<std::string> query_kinds;
  double max_error = 0.0;
  double mean_error = 0.0;
  long long coreset_points = 0;
  double coreset_weight = 0.0;
  double input_weight = 0.0;
  long long input_points = 0;
  long long peak_stored = 0;
  /// Only filled when timings are requested; everything else is deterministic.
  std::map<std::string, double> seconds;
  nlohmann::json config;
  nlohmann::json params;
  /// Stream mode: one entry per evaluated prefix.
  nlohmann::json prefixes = nlohmann::json::array();

  bool operator==(const QualityReport&) const = default;
};

/// rel_err = |cost(S,u,C) - cost(P,w,C)| / cost(P,w,C) per query; zero-cost queries are skipped.
inline QualityReport evaluate(const CostModel& model, const WeightedSet& p, const WeightedSet& s,
                              const QuerySet& queries) {
  require(!queries.queries.empty(), "evaluate: no queries");
  QualityReport r;
  double sum = 0.0;
  for (std::size_t q = 0; q < queries.queries.size(); ++q) {
    const double truth = bar_cost(model, p, queries.queries[q]);
    if (!(truth > 0.0)) continue;
    const double est = bar_cost(model, s, queries.queries[q]);
    const double e = std::abs(est - truth) / truth;
    r.errors.push_back(e);
    r.query_kinds.push_back(q < queries.kinds.size() ? queries.kinds[q] : "query");
    r.max_error = std::max(r.max_error, e);
    sum += e;
  }
  if (r.errors.empty()) throw DomainError("evaluate: every query has zero cost");
  r.mean_error = sum / static_cast<double>(r.errors.size());
  r.coreset_points = static_cast<long long>(s.size());
  r.coreset_weight = s.total_weight();
  r.input_points = static_cast<long long>(p.size());
  r.input_weight = p.total_weight();
  return r;
}

inline nlohmann::json to_json(const QualityReport& r) {
  nlohmann::json j;
  j["schema"] = r.schema;
  j["mode"] = r.mode;
  j["errors"] = r.errors;
  j["query_kinds"] = r.query_kinds;
  j["max_error"] = r.max_error;
  j["mean_error"] = r.mean_error;
  j["coreset_points"] = r.coreset_points;
  j["coreset_weight"] = r.coreset_weight;
  j["input_points"] = r.input_points;
  j["input_weight"] = r.input_weight;
  j["peak_stored"] = r.peak_stored;
  j["seconds"] = r.seconds;
  j["config"] = r.config;
  j["params"] = r.params;
  j["prefixes"] = r.prefixes;
  return j;
}

inline QualityReport report_from_json(const nlohmann::json& j) {
  if (j.at("schema").get<int>() != 1) throw DataError("unsupported report schema");
  QualityReport r;
  r.mode = j.at("mode").get<std::string>();
  r.errors = j.at("errors").get<std::vector<double>>();
  r.query_kinds = j.at("query_kinds").get<std::vector<std::string>>();
  r.max_error = j.at("max_error").get<double>();
  r.mean_error = j.at("mean_error").get<double>();
  r.coreset_points = j.at("coreset_points").get<long long>();
  r.coreset_weight = j.at("coreset_weight").get<double>();
  r.input_points = j.at("input_points").get<long long>();
  r.input_weight = j.at("input_weight").get<double>();
  r.peak_stored = j.at("peak_stored").get<long long>();
  r.seconds = j.at("seconds").get<std::map<std::string, double>>();
  r.config = j.at("config");
  r.params = j.at("params");
  r.prefixes = j.at("prefixes");
  return r;
}

inline std::string serialize(const QualityReport& r) { return to_json(r).dump(2) + "\n"; }

inline QualityReport parse_report(const std::string& text) {
  try {
    return report_from_json(nlohmann::json::parse(text));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("report: ") + e.what());
  }
}

// ---------------------------------------------------------------- orchestration

struct RunOutput {
  QualityReport report;
  CoresetSample coreset;
  std::vector<MoveRecord> moves;
};

namespace detail {

class Stopwatch {
 public:
  explicit Stopwatch(bool on) : on_(on), start_(std::chrono::steady_clock::now()) {}
  void lap(std::map<std::string, double>& into, const std::string& name) {
    const auto now = std::chrono::steady_clock::now();
    if (on_) into[name] += std::chrono::duration<double>(now - start_).count();
    start_ = now;
  }

 private:
  bool on_;
  std::chrono::steady_clock::time_point start_;
};

inline WeightedSet prefix(const WeightedSet& p, std::size_t n) {
  WeightedSet out;
  out.points.assign(p.points.begin(), p.points.begin() + static_cast<std::ptrdiff_t>(n));
  out.weights.assign(p.weights.begin(), p.weights.begin() + static_cast<std::ptrdiff_t>(n));
  return out;
}

inline int point_dim(const WeightedSet& p) {
  std::size_t d = 1;
  for (const auto& q : p.points) d = std::max(d, q.dim());
  return static_cast<int>(d);
}

}  // namespace detail

/// Runs one experiment on an in-memory stream.
inline RunOutput run_on(const ExperimentConfig& cfg, const WeightedSet& data) {
  cfg.validate();
  if (data.empty()) throw DataError("input has no points");
  const CostModel model = cfg.cost_model();
  const Rng root(*cfg.seed);
  Rng build_rng = root.split(10);
  const Rng query_rng = root.split(20);
  const long long n_bound = cfg.n > 0 ? cfg.n : static_cast<long long>(data.size());
  if (n_bound < static_cast<long long>(data.size())) throw ConfigError("n is smaller than the number of input points");
  const int qdim = detail::point_dim(data) + 1;

  RunOutput out;
  QualityReport& rep = out.report;
  std::map<std::string, double> seconds;
  detail::Stopwatch clock(cfg.timings);
  nlohmann::json params;
  params["rho"] = model.rho();
  params["lll_exponent"] = model.lll_exponent();
  params["query_dim"] = qdim;

  if (cfg.mode == Mode::offline) {
    const Assignment a = dsquared_seed(model, data, cfg.k, cfg.oversample, build_rng);
    clock.lap(seconds, "bicriterion");
    const double t = total_sensitivity_bound(model.rho(), cfg.alpha, a.centers.size());
    const long long m = sample_size(t, QuerySpec(cfg.k, qdim), cfg.eps, cfg.delta, cfg.c_const);
    out.coreset = build_coreset(data, a, m, build_rng);
    clock.lap(seconds, "sample");
    params["t_prime"] = t;
    params["m"] = m;
    params["bicriterion_centers"] = a.centers.size();
    params["alpha"] = cfg.alpha;
    rep = evaluate(model, data, out.coreset.set,
                   make_queries(model, data, out.coreset.set, cfg.k, cfg.query_count, query_rng));
    rep.peak_stored = static_cast<long long>(data.size());
    clock.lap(seconds, "evaluate");
  } else if (cfg.mode == Mode::stream) {
    StreamConfig sc;
    sc.k = cfg.k;
    sc.n = n_bound;
    sc.eps = cfg.eps;
    sc.delta = cfg.delta;
    sc.c_const = cfg.c_const;
    sc.schedule = cfg.schedule;
    sc.phi = cfg.phi;
    sc.gamma = cfg.gamma;
    sc.gamma_offline = cfg.gamma_offline;
    sc.alpha_bar = cfg.alpha_bar;
    sc.sample_budget = cfg.sample_budget;
    sc.record_moves = true;
    StreamingCoreset stream(model, sc, build_rng);
    const std::size_t n = data.size();
    std::size_t next = 0;
    for (int j = 1; j <= cfg.prefixes; ++j) {
      const std::size_t upto = std::max<std::size_t>(1, n * static_cast<std::size_t>(j) / static_cast<std::size_t>(cfg.prefixes));
      for (; next < upto; ++next) stream.insert(data.points[next], data.weights[next]);
      clock.lap(seconds, "stream");
      const CoresetSample s = stream.coreset();
      const WeightedSet pre = detail::prefix(data, upto);
      QualityReport pr = evaluate(model, pre, s.set, make_queries(model, pre, s.set, cfg.k, cfg.query_count, query_rng.split(static_cast<std::uint64_t>(j))));
      clock.lap(seconds, "evaluate");
      rep.prefixes.push_back({{"points", upto},
                              {"max_error", pr.max_error},
                              {"mean_error", pr.mean_error},
                              {"coreset_points", pr.coreset_points},
                              {"coreset_weight", pr.coreset_weight},
                              {"stored", stream.stored_points()}});
      if (upto == n) {
        const long long peak = static_cast<long long>(stream.peak_stored());
        nlohmann::json evaluated = std::move(rep.prefixes);
        rep = std::move(pr);
        rep.prefixes = std::move(evaluated);
        rep.peak_stored = peak;
        out.coreset = s;
      }
    }
    const auto& bp = stream.bicriterion().params();
    params["phi"] = bp.phi;
    params["gamma"] = bp.gamma;
    params["lambda"] = bp.lambda;
    params["alpha_bar"] = stream.alpha_bar();
    params["t_prime"] = stream.t_prime();
    params["x_scale"] = stream.x_scale();
    params["predicted_budget"] = stream.predicted_budget();
    params["phases"] = stream.bicriterion().phase();
    params["lower_bounds"] = stream.bicriterion().lower_bounds();
    params["phase_costs"] = stream.bicriterion().phase_costs();
    params["degenerate"] = stream.degenerate();
    out.moves = stream.bicriterion().moves();
  } else {
    MergeReduceConfig mc;
    mc.k = cfg.k;
    mc.n = n_bound;
    mc.eps = cfg.eps;
    mc.delta = cfg.delta;
    mc.c_const = cfg.c_const;
    mc.point_dim = detail::point_dim(data);
    mc.oversample = cfg.oversample;
    mc.assumed_alpha = cfg.alpha;
    mc.segment_size = cfg.segment_size;
    BucketTree tree(model, mc, build_rng);
    for (std::size_t i = 0; i < data.size(); ++i) tree.insert(data.points[i], data.weights[i]);
    clock.lap(seconds, "stream");
    out.coreset = tree.emit();
    params["segment_size"] = tree.segment_size();
    params["eps_leaf"] = tree.eps_leaf();
    params["levels"] = tree.levels();
    params["reduce_size"] = tree.reduce_size();
    params["accuracy"] = tree.accuracy();
    rep = evaluate(model, data, out.coreset.set,
                   make_queries(model, data, out.coreset.set, cfg.k, cfg.query_count, query_rng));
    rep.peak_stored = static_cast<long long>(tree.peak_stored());
    clock.lap(seconds, "evaluate");
  }
  rep.mode = to_string(cfg.mode);
  rep.config = to_json(cfg);
  rep.params = params;
  rep.seconds = seconds;
  return out;
}

inline RunOutput run(const ExperimentConfig& cfg) {
  cfg.validate();
  const WeightedSet data = ingest_stream(cfg.input, cfg.format, cfg.weighted, cfg.header);
  return run_on(cfg, data);
}

}  // namespace coreset
