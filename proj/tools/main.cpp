// sgrecon command line: experiment runners over the library.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sgrecon/empirical.hpp"
#include "sgrecon/ensembles.hpp"
#include "sgrecon/geometry.hpp"
#include "sgrecon/harness.hpp"

using namespace sgrecon;
namespace fs = std::filesystem;

namespace {

struct Globals {
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string config;
  std::string out;
  std::size_t threads = 1;
};

EnsembleKind ensemble_or_throw(const std::string& name) {
  const auto kind = parse_ensemble_kind(name);
  if (!kind) throw CLI::ValidationError("--ensemble", "unknown ensemble '" + name + "'");
  return *kind;
}

// Prints to stdout, and also to <out>/<stem>.csv when --out is set.
void emit(const Globals& g, const CsvTable& table, const std::string& stem) {
  write_csv(table, std::cout);
  if (!g.out.empty()) {
    fs::create_directories(g.out);
    write_csv_file(table, fs::path(g.out) / (stem + ".csv"));
  }
}

std::vector<std::pair<std::string, std::string>> cli_meta(const Globals& g, const std::string& command) {
  return {{"command", command}, {"base_seed", std::to_string(g.seed)}, {"version", version_string()}};
}

// Runs a harness experiment; with --out the full output set is written too.
ExperimentOutputs run(const Globals& g, ExperimentConfig cfg) {
  cfg.base_seed = g.seed;
  cfg.threads = g.threads;
  if (!g.out.empty()) {
    cfg.output_dir = g.out;
    return run_experiment(cfg);
  }
  return execute_experiment(cfg);
}

std::vector<std::size_t> parse_size_list(const std::string& text, const std::string& flag) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  for (std::string part; std::getline(ss, part, ',');) {
    const auto dots = part.find("..");
    try {
      if (dots != std::string::npos) {
        const std::size_t lo = std::stoul(part.substr(0, dots)), hi = std::stoul(part.substr(dots + 2));
        for (std::size_t v = lo; v <= hi; ++v) out.push_back(v);
      } else {
        out.push_back(std::stoul(part));
      }
    } catch (const std::exception&) {
      throw CLI::ValidationError(flag, "expected a list like 4,8,16 or 1..12");
    }
  }
  if (out.empty()) throw CLI::ValidationError(flag, "empty list");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Subgaussian sampling, reconstruction and neighborliness experiments"};
  app.require_subcommand(0, 1);
  Globals g;
  app.add_option("--seed", g.seed, "Base seed; trial i uses seed + i")->each([&](const std::string&) { g.seed_set = true; });
  app.add_option("--config", g.config, "Run the JSON experiment config at PATH");
  app.add_option("--out", g.out, "Output directory");
  app.add_option("--threads", g.threads, "Worker threads")->check(CLI::PositiveNumber);

  // ensemble-check
  auto* ec = app.add_subcommand("ensemble-check", "Isotropy and psi2 diagnostics along canonical directions");
  std::string ec_kind = "gaussian";
  std::size_t ec_n = 4, ec_samples = 100000;
  ec->add_option("--kind", ec_kind)->check(CLI::IsMember({"gaussian", "rademacher", "uniform"}));
  ec->add_option("--n", ec_n)->check(CLI::PositiveNumber);
  ec->add_option("--samples", ec_samples)->check(CLI::PositiveNumber);

  // width
  auto* wd = app.add_subcommand("width", "Monte Carlo Gaussian mean width");
  std::string set_spec = "l1";
  std::size_t n = 64, samples = 10000, k = 32, m = 2, trials = 1;
  wd->add_option("--set", set_spec, "l1[:R] | l2[:R] | weaklp:p | sparse:m");
  wd->add_option("--n", n)->check(CLI::PositiveNumber);
  wd->add_option("--samples", samples)->check(CLI::Range(2ul, ~0ul));

  // rstar
  auto* rs = app.add_subcommand("rstar", "Fixed-point radius r*_k(theta, T)");
  double theta = 0.5, alpha = 1.0, c_norm = 1.0;
  std::size_t rs_samples = 256;
  rs->add_option("--set", set_spec);
  rs->add_option("--n", n)->check(CLI::PositiveNumber);
  rs->add_option("--k", k)->check(CLI::PositiveNumber);
  rs->add_option("--theta", theta)->check(CLI::Range(0.0, 1.0));
  rs->add_option("--alpha", alpha)->check(CLI::Range(1.0, 1e9));
  rs->add_option("--c-norm", c_norm)->check(CLI::PositiveNumber);
  rs->add_option("--samples", rs_samples)->check(CLI::Range(2ul, ~0ul));

  // empirical
  auto* em = app.add_subcommand("empirical", "E sup|Z| over the canonical basis against k");
  std::string ensemble = "gaussian";
  std::string em_kgrid = "16,64,256,1024";
  em->add_option("--ensemble", ensemble);
  em->add_option("--n", n)->check(CLI::PositiveNumber);
  em->add_option("--kgrid", em_kgrid);
  em->add_option("--trials", trials)->check(CLI::PositiveNumber);

  // recover
  auto* rc = app.add_subcommand("recover", "Exact (basis pursuit) or approximate (projected gradient) recovery");
  std::string mode = "exact";
  double epsilon = 1e-4;
  std::size_t max_iters = 10000;
  rc->add_option("--mode", mode)->check(CLI::IsMember({"exact", "approx"}));
  rc->add_option("--ensemble", ensemble);
  rc->add_option("--n", n)->check(CLI::PositiveNumber);
  rc->add_option("--k", k)->check(CLI::PositiveNumber);
  rc->add_option("--m", m)->check(CLI::PositiveNumber);
  rc->add_option("--trials", trials);
  rc->add_option("--epsilon", epsilon)->check(CLI::NonNegativeNumber);
  rc->add_option("--set", set_spec, "approx mode: l1[:R] or l2[:R]");
  rc->add_option("--max-iters", max_iters);

  // phase
  auto* ph = app.add_subcommand("phase", "Exact-recovery success rates over a (k, m) grid");
  std::string mgrid = "1..12";
  std::string ph_kgrid = "16,32,48";
  ph->add_option("--ensemble", ensemble);
  ph->add_option("--n", n)->check(CLI::PositiveNumber);
  ph->add_option("--kgrid", ph_kgrid);
  ph->add_option("--mgrid", mgrid);
  ph->add_option("--trials", trials);

  // neighborly
  auto* nb = app.add_subcommand("neighborly", "m-neighborliness scan of K+(Gamma) or K(Gamma)");
  bool symmetric = false, strict_lt = false;
  std::size_t sampled = 0;
  nb->add_option("--ensemble", ensemble);
  nb->add_option("--k", k)->check(CLI::PositiveNumber);
  nb->add_option("--n", n)->check(CLI::PositiveNumber);
  nb->add_option("--m", m)->check(CLI::PositiveNumber);
  nb->add_option("--trials", trials, "Number of seeds");
  nb->add_flag("--symmetric", symmetric);
  nb->add_flag("--strict-lt", strict_lt, "Check sizes < m instead of <= m");
  nb->add_option("--sampled", sampled, "Number of sampled queries (default: exhaustive)");

  // summarize
  auto* sm = app.add_subcommand("summarize", "Aggregate experiment CSVs");
  std::vector<std::string> inputs;
  sm->add_option("inputs", inputs)->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (!g.config.empty()) {
      if (app.get_subcommands().size() > 0) throw CLI::ValidationError("--config", "cannot be combined with a subcommand");
      ExperimentConfig cfg = load_config(g.config);
      if (g.seed_set) cfg.base_seed = g.seed;
      if (!g.out.empty()) cfg.output_dir = g.out;
      if (g.threads > 1) cfg.threads = g.threads;
      const ExperimentOutputs out = run_experiment(cfg);
      std::cout << out.csv.string() << '\n' << out.timing.string() << '\n' << out.manifest.string() << '\n';
      if (!out.matrix.empty()) std::cout << out.matrix.string() << '\n';
      return 0;
    }

    if (*ec) {
      const Ensemble ens = Ensemble::make(*parse_ensemble_kind(ec_kind));
      std::vector<Vector> dirs(ec_n, Vector(ec_n, 0.0));
      for (std::size_t i = 0; i < ec_n; ++i) dirs[i][i] = 1.0;
      RngState rng{g.seed, 0};
      RngState psi_rng = rng.substream(1);
      const auto moments = isotropy_check(ens, ec_n, ec_samples, dirs, rng);
      // Along e_i the projection is the i-th coordinate, so columns of a fresh draw give the psi2 samples.
      const SamplingMatrix draws = sample_matrix(ens, ec_samples, ec_n, psi_rng);
      CsvTable t{cli_meta(g, "ensemble-check"), {"direction_index", "empirical_moment", "std_err", "psi2_estimate"}, {}};
      for (std::size_t i = 0; i < ec_n; ++i) {
        const Vector col = draws.column(i);
        t.rows.push_back({std::to_string(i), format_real(moments[i].empirical_moment), format_real(moments[i].std_err),
                          format_real(psi2_estimate(col))});
      }
      emit(g, t, "ensemble_check");
    } else if (*wd || *rs) {
      ExperimentConfig cfg;
      cfg.kind = *wd ? ExperimentKind::Width : ExperimentKind::RStar;
      cfg.name = *wd ? "width" : "rstar";
      cfg.set = set_spec;
      cfg.n_grid = {n};
      cfg.trials = 1;
      if (!parse_set(set_spec, n)) throw CLI::ValidationError("--set", "unknown set '" + set_spec + "'");
      if (*wd) {
        cfg.samples = samples;
      } else {
        cfg.samples = rs_samples;
        cfg.k_grid = {k};
        cfg.theta_grid = {theta};
        cfg.alpha = alpha;
        cfg.c_norm = c_norm;
      }
      const ExperimentOutputs out = run(g, cfg);
      CsvTable t{cli_meta(g, cfg.name), out.metric_names, {out.records.front().metrics}};
      write_csv(t, std::cout);
    } else if (*em) {
      const Ensemble ens = Ensemble::make(ensemble_or_throw(ensemble));
      const RngState rng{g.seed, 0};
      const ScalingReport rep =
          sup_scaling_diag(FunctionalClass::canonical_basis(n), ens, parse_size_list(em_kgrid, "--kgrid"), trials, rng);
      CsvTable t{cli_meta(g, "empirical"), {"k", "mean_sup_Z", "std_err"}, {}};
      for (const auto& row : rep.rows)
        t.rows.push_back({std::to_string(row.k), format_real(row.mean_sup_z), format_real(row.std_err)});
      t.rows.push_back({"fitted_slope", format_real(rep.slope), format_real(rep.slope_std_err)});
      emit(g, t, "empirical");
    } else if (*rc) {
      ExperimentConfig cfg;
      cfg.kind = ExperimentKind::Recover;
      cfg.name = "recover";
      cfg.ensemble = ensemble_or_throw(ensemble);
      cfg.mode = mode;
      cfg.set = set_spec;
      cfg.max_iters = max_iters;
      cfg.n_grid = {n};
      cfg.k_grid = {k};
      cfg.m_grid = {m};
      cfg.epsilon_grid = {epsilon};
      cfg.trials = trials;
      const ExperimentOutputs out = run(g, cfg);
      CsvTable t{cli_meta(g, "recover"), {"trial", "outcome", "error", "residual", "time_ms"}, {}};
      for (const auto& rec : out.records) {
        const bool ok = rec.metrics[0] == "1";
        t.rows.push_back({std::to_string(rec.trial), mode == "exact" ? (ok ? "success" : "failure") : (ok ? "converged" : "not_converged"),
                          rec.metrics[1], rec.metrics[2], format_real(rec.wall_ms)});
      }
      write_csv(t, std::cout);
    } else if (*ph) {
      ExperimentConfig cfg;
      cfg.kind = ExperimentKind::Phase;
      cfg.name = "phase";
      cfg.ensemble = ensemble_or_throw(ensemble);
      cfg.n_grid = {n};
      cfg.k_grid = parse_size_list(ph_kgrid, "--kgrid");
      cfg.m_grid = parse_size_list(mgrid, "--mgrid");
      cfg.trials = trials;
      const ExperimentOutputs out = run(g, cfg);
      CsvTable t{cli_meta(g, "phase"), {"k"}, {}};
      for (std::size_t mm : cfg.m_grid) t.header.push_back("m=" + std::to_string(mm));
      for (std::size_t r = 0; r < out.success_matrix.size(); ++r) {
        std::vector<std::string> row = {std::to_string(cfg.k_grid[r])};
        for (double v : out.success_matrix[r]) row.push_back(format_real(v));
        t.rows.push_back(std::move(row));
      }
      write_csv(t, std::cout);
    } else if (*nb) {
      ExperimentConfig cfg;
      cfg.kind = ExperimentKind::Neighborly;
      cfg.name = "neighborly";
      cfg.ensemble = ensemble_or_throw(ensemble);
      cfg.n_grid = {n};
      cfg.k_grid = {k};
      cfg.m_grid = {m};
      cfg.symmetric = symmetric;
      cfg.strict_lt = strict_lt;
      cfg.sampled_queries = sampled;
      cfg.trials = trials;
      const ExperimentOutputs out = run(g, cfg);
      CsvTable t{cli_meta(g, "neighborly"), {"seed", "verdict", "counterexample", "queries_checked", "time_ms"}, {}};
      for (const auto& rec : out.records)
        t.rows.push_back({std::to_string(rec.seed), rec.metrics[0] == "1" ? "neighborly" : "not_neighborly",
                          rec.metrics[3], rec.metrics[1], format_real(rec.wall_ms)});
      write_csv(t, std::cout);
    } else if (*sm) {
      std::vector<fs::path> paths(inputs.begin(), inputs.end());
      const Summary s = summarize(paths);
      emit(g, s.table, "summary");
      if (!s.slopes.empty()) {
        std::cout << '\n';
        emit(g, s.slope_table(), "summary_slopes");
      }
    } else {
      std::cout << app.help();
    }
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
