// Command-line front end: build, evaluate and inspect clustering coresets.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "coreset/all.hpp"

namespace {

using namespace coreset;

constexpr int exit_ok = 0;
constexpr int exit_config = 2;
constexpr int exit_data = 3;
constexpr int exit_invariant = 4;

struct Outputs {
  std::string coreset;
  std::string errors_csv;
  std::string moves_csv;
};

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;
  const char* env = std::getenv("COR_SEED");
  if (!env || !*env) throw ConfigError("a seed is required: pass --seed or set COR_SEED");
  try {
    std::size_t used = 0;
    const auto v = std::stoull(env, &used);
    if (used != std::string(env).size()) throw std::invalid_argument(env);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(std::string("COR_SEED is not an unsigned integer: '") + env + "'");
  }
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << text;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  return out;
}

void add_input_flags(CLI::App* cmd, ExperimentConfig& cfg, std::string& format) {
  cmd->add_option("-i,--input", cfg.input, "Input file (one point per row)")->required();
  cmd->add_option("--format", format, "csv or sparse (index:value, 0-based)")->capture_default_str();
  cmd->add_flag("--weighted", cfg.weighted, "First column of each row is the point weight");
  cmd->add_flag("--header", cfg.header, "Skip the first CSV line");
}

void add_model_flags(CLI::App* cmd, ExperimentConfig& cfg, std::optional<std::uint64_t>& seed) {
  cmd->add_option("--model", cfg.model, "kmedian | kmeans | lp:<p> | huber:<c> | cauchy:<c> | tukey:<c>")
      ->capture_default_str();
  cmd->add_option("-k", cfg.k, "Number of centers")->capture_default_str();
  cmd->add_option("--seed", seed, "RNG seed (falls back to COR_SEED)");
  cmd->add_option("--queries", cfg.query_count, "Evaluation queries")->capture_default_str();
  cmd->add_option("-o,--output", cfg.output, "JSON report path (default stdout)");
}

void add_build_flags(CLI::App* cmd, ExperimentConfig& cfg, Outputs& outs, std::optional<double>& alpha_bar,
                     std::optional<double>& budget, std::optional<long long>& segment, std::string& schedule) {
  cmd->add_option("--eps", cfg.eps, "Target accuracy in (0,1)")->capture_default_str();
  cmd->add_option("--delta", cfg.delta, "Failure probability in (0,1)")->capture_default_str();
  cmd->add_option("-c,--c-const", cfg.c_const, "Sample-size constant")->capture_default_str();
  cmd->add_option("--n", cfg.n, "Stream-length bound (default: number of input points)");
  cmd->add_option("--alpha", cfg.alpha, "Approximation factor assumed for the offline bicriterion")
      ->capture_default_str();
  cmd->add_option("--oversample", cfg.oversample, "Seeding oversampling factor")->capture_default_str();
  cmd->add_option("--phi", cfg.phi, "Growth factor of the streaming lower bound");
  cmd->add_option("--gamma", cfg.gamma, "Phase cost factor of the streaming bicriterion");
  cmd->add_option("--gamma-offline", cfg.gamma_offline, "Approximation factor of the offline step on live centers")
      ->capture_default_str();
  cmd->add_option("--alpha-bar", alpha_bar, "Override the sensitivity schedule's approximation factor");
  cmd->add_option("--sample-budget", budget, "Expected sample size for the algorithm1 schedule");
  cmd->add_option("--segment-size", segment, "Merge-reduce leaf segment size");
  cmd->add_option("--schedule", schedule, "sensitivity | algorithm1")->capture_default_str();
  cmd->add_option("--prefixes", cfg.prefixes, "Evaluated prefixes in stream mode")->capture_default_str();
  cmd->add_flag("--timings", cfg.timings, "Include wall-clock seconds in the report");
  cmd->add_option("--coreset-out", outs.coreset, "Write the coreset (input format, weight first)");
  cmd->add_option("--errors-csv", outs.errors_csv, "Write per-query relative errors as CSV");
  cmd->add_option("--moves-csv", outs.moves_csv, "Write the bicriterion move log as CSV (stream mode)");
}

void write_errors_csv(const std::string& path, const QualityReport& r) {
  auto out = open_out(path);
  out << "query,kind,rel_error\n";
  out.precision(17);
  for (std::size_t i = 0; i < r.errors.size(); ++i) out << i << ',' << r.query_kinds[i] << ',' << r.errors[i] << '\n';
}

void write_moves_csv(const std::string& path, const std::vector<MoveRecord>& moves) {
  auto out = open_out(path);
  out << "phase,from_id,to_id,weight,cost\n";
  out.precision(17);
  for (const auto& m : moves) out << m.phase << ',' << m.from << ',' << m.to << ',' << m.weight << ',' << m.cost << '\n';
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Coreset construction for k-median, k-means and M-estimator clustering"};
  app.require_subcommand(1);

  ExperimentConfig cfg;
  std::optional<std::uint64_t> seed;
  std::string format = "csv";
  std::string schedule = "sensitivity";
  std::optional<double> alpha_bar, budget;
  std::optional<long long> segment;
  Outputs outs;

  std::vector<CLI::App*> builders;
  for (const char* name : {"offline", "stream", "mergereduce"}) {
    auto* cmd = app.add_subcommand(name, std::string("Build a coreset in ") + name + " mode and evaluate it");
    add_input_flags(cmd, cfg, format);
    add_model_flags(cmd, cfg, seed);
    add_build_flags(cmd, cfg, outs, alpha_bar, budget, segment, schedule);
    builders.push_back(cmd);
  }

  std::string coreset_path;
  auto* eval = app.add_subcommand("eval", "Evaluate a weighted coreset file against its input");
  add_input_flags(eval, cfg, format);
  add_model_flags(eval, cfg, seed);
  eval->add_option("--coreset", coreset_path, "Coreset file (input format with a weight column)")->required();
  eval->add_option("--errors-csv", outs.errors_csv, "Write per-query relative errors as CSV");

  std::string method = "exact";
  bool sensitivity = false;
  auto* oracle = app.add_subcommand("oracle", "Reference solutions and grid sensitivities on small inputs");
  add_input_flags(oracle, cfg, format);
  add_model_flags(oracle, cfg, seed);
  oracle->add_option("--method", method, "exact | lloyd | swap")->capture_default_str();
  oracle->add_flag("--sensitivity", sensitivity, "Also report grid-oracle sensitivities (1-d/2-d, k <= 2)");

  MixtureSpec mix;
  std::string gen_out;
  auto* gen = app.add_subcommand("gen", "Generate a Gaussian-mixture CSV");
  gen->add_option("--n", mix.n, "Points")->capture_default_str();
  gen->add_option("--dim", mix.dim, "Dimension")->capture_default_str();
  gen->add_option("--components", mix.components, "Mixture components")->capture_default_str();
  gen->add_option("--sigma", mix.sigma, "Component standard deviation")->capture_default_str();
  gen->add_option("--box", mix.box, "Means are uniform in [-box, box]^dim")->capture_default_str();
  gen->add_option("--seed", seed, "RNG seed (falls back to COR_SEED)");
  gen->add_option("-o,--output", gen_out, "Output CSV (default stdout)");

  std::uint64_t seed_from = 0, seed_to = 20;
  std::vector<std::string> only;
  std::string props_out;
  auto* props = app.add_subcommand("props", "Run the randomized property suite");
  props->add_option("--from", seed_from, "First seed")->capture_default_str();
  props->add_option("--to", seed_to, "One past the last seed")->capture_default_str();
  props->add_option("--only", only, "Restrict to these property ids");
  props->add_option("-o,--output", props_out, "JSON report path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_ok : exit_config;
  }

  try {
    cfg.format = parse_format(format);

    for (std::size_t b = 0; b < builders.size(); ++b) {
      if (!*builders[b]) continue;
      cfg.mode = static_cast<Mode>(b);
      cfg.schedule = [&] {
        try {
          return parse_schedule(schedule);
        } catch (const DomainError& e) {
          throw ConfigError(e.what());
        }
      }();
      cfg.seed = resolve_seed(seed);
      cfg.alpha_bar = alpha_bar;
      cfg.sample_budget = budget;
      cfg.segment_size = segment;
      cfg.validate();
      const RunOutput out = run(cfg);
      write_text(cfg.output, serialize(out.report));
      if (!outs.coreset.empty()) {
        auto f = open_out(outs.coreset);
        write_points(f, out.coreset.set, cfg.format);
      }
      if (!outs.errors_csv.empty()) write_errors_csv(outs.errors_csv, out.report);
      if (!outs.moves_csv.empty()) write_moves_csv(outs.moves_csv, out.moves);
      return exit_ok;
    }

    if (*eval) {
      cfg.seed = resolve_seed(seed);
      cfg.validate();
      const CostModel model = cfg.cost_model();
      const WeightedSet p = ingest_stream(cfg.input, cfg.format, cfg.weighted, cfg.header);
      const WeightedSet s = ingest_stream(coreset_path, cfg.format, true, false);
      if (p.empty() || s.empty()) throw DataError("input and coreset must be nonempty");
      QualityReport r = evaluate(model, p, s, make_queries(model, p, s, cfg.k, cfg.query_count, Rng(*cfg.seed).split(20)));
      r.mode = "eval";
      r.config = to_json(cfg);
      write_text(cfg.output, serialize(r));
      if (!outs.errors_csv.empty()) write_errors_csv(outs.errors_csv, r);
      return exit_ok;
    }

    if (*oracle) {
      cfg.seed = resolve_seed(seed);
      const CostModel model = cfg.cost_model();
      if (cfg.k < 1) throw ConfigError("k must be >= 1");
      const WeightedSet p = ingest_stream(cfg.input, cfg.format, cfg.weighted, cfg.header);
      if (p.empty()) throw DataError("input has no points");
      Rng rng(*cfg.seed);
      Solution sol;
      if (method == "exact") {
        sol = exact_partition(model, p, cfg.k);
      } else if (method == "lloyd") {
        sol = weighted_lloyd(model, p, cfg.k, 25, rng);
      } else if (method == "swap") {
        sol = medoid_swap(model, p, cfg.k, 25 * cfg.k, rng);
      } else {
        throw ConfigError("unknown oracle method '" + method + "'");
      }
      nlohmann::json j;
      j["schema"] = 1;
      j["mode"] = "oracle";
      j["method"] = to_string(sol.method);
      j["cost"] = sol.cost;
      nlohmann::json centers = nlohmann::json::array();
      for (const auto& c : sol.centers) centers.push_back(c.to_dense(c.dim()));
      j["centers"] = centers;
      if (sensitivity) {
        const auto s = brute_sensitivity(model, p, cfg.k, grid_queries(p, cfg.k));
        j["sensitivity"] = s.s;
        j["total_sensitivity"] = s.total;
      }
      write_text(cfg.output, j.dump(2) + "\n");
      return exit_ok;
    }

    if (*gen) {
      const auto data = gaussian_mixture(mix, Rng(resolve_seed(seed)));
      if (gen_out.empty() || gen_out == "-") {
        write_points(std::cout, data, Format::csv, false);
      } else {
        auto f = open_out(gen_out);
        write_points(f, data, Format::csv, false);
      }
      return exit_ok;
    }

    if (*props) {
      if (seed_to <= seed_from) throw ConfigError("--to must exceed --from");
      const auto report = check_all(seed_from, seed_to, only);
      write_text(props_out, report.dump(2) + "\n");
      return report.at("passed").get<bool>() ? exit_ok : exit_invariant;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return exit_config;
  } catch (const DomainError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return exit_config;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return exit_data;
  } catch (const InvariantError& e) {
    std::cerr << "invariant violation: " << e.what() << '\n';
    return exit_invariant;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return exit_invariant;
  }
  return exit_ok;
}

}  // namespace

int main(int argc, char** argv) { return run_cli(argc, argv); }
