#include "sgrecon/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "sgrecon/empirical.hpp"
#include "sgrecon/geometry.hpp"
#include "sgrecon/lp.hpp"
#include "sgrecon/parallel.hpp"
#include "sgrecon/polytope.hpp"
#include "sgrecon/recover.hpp"
#include "sgrecon/rng.hpp"
#include "sgrecon/stats.hpp"

#ifndef SGRECON_VERSION
#define SGRECON_VERSION "unknown"
#endif

namespace sgrecon {

using json = nlohmann::json;
namespace fs = std::filesystem;

std::string_view to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Recover: return "recover";
    case ExperimentKind::Phase: return "phase";
    case ExperimentKind::Empirical: return "empirical";
    case ExperimentKind::Neighborly: return "neighborly";
    case ExperimentKind::Width: return "width";
    case ExperimentKind::RStar: return "rstar";
  }
  return "unknown";
}

std::string version_string() { return SGRECON_VERSION; }

ConfigError::ConfigError(std::size_t line, const std::string& message)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message : message), line_(line) {}

// ---------------------------------------------------------------- config

namespace {

std::size_t line_at(std::string_view text, std::size_t pos) {
  pos = std::min(pos, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
}

// Line of the first `"key"` used as an object key; 0 if absent.
std::size_t key_line(std::string_view text, std::string_view key) {
  const std::string quoted = "\"" + std::string(key) + "\"";
  for (std::size_t pos = text.find(quoted); pos != std::string_view::npos; pos = text.find(quoted, pos + 1)) {
    std::size_t after = pos + quoted.size();
    while (after < text.size() && std::isspace(static_cast<unsigned char>(text[after]))) ++after;
    if (after < text.size() && text[after] == ':') return line_at(text, pos);
  }
  return 0;
}

const std::vector<std::string> kTopKeys = {"experiment", "name",     "ensemble",  "grid",      "trials",
                                           "base_seed",  "mode",     "set",       "samples",   "alpha",
                                           "c_norm",     "symmetric", "strict_lt", "sampled_queries",
                                           "max_iters",  "threads",  "output"};
const std::vector<std::string> kGridKeys = {"n", "k", "m", "theta", "epsilon", "p"};

struct Reader {
  std::string_view text;
  const json& obj;

  [[noreturn]] void fail(std::string_view key, const std::string& msg) const {
    throw ConfigError(key_line(text, key), "\"" + std::string(key) + "\": " + msg);
  }
  bool has(const char* key) const { return obj.contains(key); }

  std::string str(const char* key) const {
    const json& v = obj.at(key);
    if (!v.is_string()) fail(key, "expected a string");
    return v.get<std::string>();
  }
  std::uint64_t uint(const char* key) const {
    const json& v = obj.at(key);
    if (!v.is_number_unsigned()) fail(key, "expected a nonnegative integer");
    return v.get<std::uint64_t>();
  }
  double real(const char* key) const {
    const json& v = obj.at(key);
    if (!v.is_number()) fail(key, "expected a number");
    return v.get<double>();
  }
  bool boolean(const char* key) const {
    const json& v = obj.at(key);
    if (!v.is_boolean()) fail(key, "expected true or false");
    return v.get<bool>();
  }
};

std::vector<std::size_t> size_grid(std::string_view text, const json& v, const char* key) {
  if (!v.is_array() || v.empty()) throw ConfigError(key_line(text, key), "\"" + std::string(key) + "\": expected a nonempty array");
  std::vector<std::size_t> out;
  for (const auto& e : v) {
    if (!e.is_number_unsigned() || e.get<std::uint64_t>() == 0)
      throw ConfigError(key_line(text, key), "\"" + std::string(key) + "\": entries must be positive integers");
    out.push_back(e.get<std::size_t>());
  }
  return out;
}

std::vector<double> real_grid(std::string_view text, const json& v, const char* key) {
  if (!v.is_array() || v.empty()) throw ConfigError(key_line(text, key), "\"" + std::string(key) + "\": expected a nonempty array");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) throw ConfigError(key_line(text, key), "\"" + std::string(key) + "\": entries must be numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

std::optional<ExperimentKind> parse_kind(std::string_view s) {
  for (auto k : {ExperimentKind::Recover, ExperimentKind::Phase, ExperimentKind::Empirical, ExperimentKind::Neighborly,
                 ExperimentKind::Width, ExperimentKind::RStar})
    if (to_string(k) == s) return k;
  return std::nullopt;
}

}  // namespace

ExperimentConfig parse_config(std::string_view text) {
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ConfigError(line_at(text, e.byte == 0 ? 0 : e.byte - 1), std::string("malformed JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError(1, "config must be a JSON object");
  for (const auto& [key, value] : root.items())
    if (std::find(kTopKeys.begin(), kTopKeys.end(), key) == kTopKeys.end())
      throw ConfigError(key_line(text, key), "unknown key \"" + key + "\"");

  const Reader r{text, root};
  ExperimentConfig c;
  for (const char* req : {"experiment", "trials", "base_seed"})
    if (!r.has(req)) throw ConfigError(0, std::string("missing required key \"") + req + "\"");

  const auto kind = parse_kind(r.str("experiment"));
  if (!kind) r.fail("experiment", "unknown experiment kind");
  c.kind = *kind;
  c.name = r.has("name") ? r.str("name") : std::string(to_string(c.kind));
  if (c.name.empty() || c.name.find_first_of("/\\") != std::string::npos) r.fail("name", "must be a plain file stem");
  if (r.has("ensemble")) {
    const auto e = parse_ensemble_kind(r.str("ensemble"));
    if (!e) r.fail("ensemble", "unknown ensemble");
    c.ensemble = *e;
  }
  c.trials = r.uint("trials");
  c.base_seed = r.uint("base_seed");
  if (r.has("mode")) {
    c.mode = r.str("mode");
    if (c.mode != "exact" && c.mode != "approx") r.fail("mode", "expected \"exact\" or \"approx\"");
  }
  if (r.has("set")) c.set = r.str("set");
  if (r.has("samples")) c.samples = r.uint("samples");
  if (r.has("alpha")) c.alpha = r.real("alpha");
  if (r.has("c_norm")) c.c_norm = r.real("c_norm");
  if (r.has("symmetric")) c.symmetric = r.boolean("symmetric");
  if (r.has("strict_lt")) c.strict_lt = r.boolean("strict_lt");
  if (r.has("sampled_queries")) c.sampled_queries = r.uint("sampled_queries");
  if (r.has("max_iters")) c.max_iters = r.uint("max_iters");
  if (r.has("threads")) c.threads = std::max<std::size_t>(1, r.uint("threads"));
  if (r.has("output")) c.output_dir = r.str("output");

  if (r.has("grid")) {
    const json& g = root.at("grid");
    if (!g.is_object()) r.fail("grid", "expected an object");
    for (const auto& [key, value] : g.items())
      if (std::find(kGridKeys.begin(), kGridKeys.end(), key) == kGridKeys.end())
        throw ConfigError(key_line(text, key), "unknown grid key \"" + key + "\"");
    if (g.contains("n")) c.n_grid = size_grid(text, g.at("n"), "n");
    if (g.contains("k")) c.k_grid = size_grid(text, g.at("k"), "k");
    if (g.contains("m")) c.m_grid = size_grid(text, g.at("m"), "m");
    if (g.contains("theta")) c.theta_grid = real_grid(text, g.at("theta"), "theta");
    if (g.contains("epsilon")) c.epsilon_grid = real_grid(text, g.at("epsilon"), "epsilon");
    if (g.contains("p")) c.p_grid = real_grid(text, g.at("p"), "p");
  }
  try {
    c.validate();
  } catch (const ConfigError& e) {
    // Point at the grid block when a required grid is missing.
    const std::size_t line = key_line(text, "grid");
    throw ConfigError(line, e.what());
  }
  return c;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(0, "cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void ExperimentConfig::validate() const {
  auto need = [&](bool ok, const char* what) {
    if (!ok) throw ConfigError(0, std::string(to_string(kind)) + " experiment needs a nonempty grid \"" + what + "\"");
  };
  need(!n_grid.empty(), "n");
  switch (kind) {
    case ExperimentKind::Recover:
      need(!k_grid.empty(), "k");
      if (mode == "exact") need(!m_grid.empty(), "m");
      else need(!epsilon_grid.empty(), "epsilon");
      break;
    case ExperimentKind::Phase:
    case ExperimentKind::Neighborly:
      need(!k_grid.empty(), "k");
      need(!m_grid.empty(), "m");
      break;
    case ExperimentKind::Empirical:
      need(!k_grid.empty(), "k");
      break;
    case ExperimentKind::Width:
      break;
    case ExperimentKind::RStar:
      need(!k_grid.empty(), "k");
      need(!theta_grid.empty(), "theta");
      break;
  }
  for (double e : epsilon_grid)
    if (!(e >= 0.0)) throw ConfigError(0, "epsilon entries must be nonnegative");
  for (double t : theta_grid)
    if (!(t > 0.0 && t < 1.0)) throw ConfigError(0, "theta entries must lie in (0, 1)");
  if (!(alpha >= 1.0)) throw ConfigError(0, "alpha must be at least 1");
  if (!(c_norm > 0.0)) throw ConfigError(0, "c_norm must be positive");
  if ((kind == ExperimentKind::Width || kind == ExperimentKind::RStar) && samples < 2)
    throw ConfigError(0, "samples must be at least 2");
}

std::string ExperimentConfig::to_json() const {
  json j;
  j["experiment"] = std::string(to_string(kind));
  j["name"] = name;
  j["ensemble"] = std::string(to_string(ensemble));
  json g = json::object();
  if (!n_grid.empty()) g["n"] = n_grid;
  if (!k_grid.empty()) g["k"] = k_grid;
  if (!m_grid.empty()) g["m"] = m_grid;
  if (!theta_grid.empty()) g["theta"] = theta_grid;
  if (!epsilon_grid.empty()) g["epsilon"] = epsilon_grid;
  if (!p_grid.empty()) g["p"] = p_grid;
  j["grid"] = g;
  j["trials"] = trials;
  j["base_seed"] = base_seed;
  j["mode"] = mode;
  j["set"] = set;
  j["samples"] = samples;
  j["alpha"] = alpha;
  j["c_norm"] = c_norm;
  j["symmetric"] = symmetric;
  j["strict_lt"] = strict_lt;
  j["sampled_queries"] = sampled_queries;
  j["max_iters"] = max_iters;
  return j.dump();
}

std::string ExperimentConfig::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char ch : to_json()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---------------------------------------------------------------- csv

std::string format_real(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

std::string CsvTable::meta_value(std::string_view key) const {
  for (const auto& [k, v] : meta)
    if (k == key) return v;
  return {};
}

std::size_t CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw std::out_of_range("csv: no column " + std::string(name));
}

void write_csv(const CsvTable& table, std::ostream& os) {
  for (const auto& [k, v] : table.meta) os << "# " << k << ": " << v << "\r\n";
  auto row_out = [&](const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << csv_escape(row[i]);
    os << "\r\n";
  };
  row_out(table.header);
  for (const auto& row : table.rows) row_out(row);
}

void write_csv_file(const CsvTable& table, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_csv(table, out);
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

CsvTable parse_csv(std::string_view text) {
  CsvTable table;
  std::size_t pos = 0;
  bool have_header = false;
  while (pos < text.size()) {
    if (!have_header && text[pos] == '#') {
      std::size_t end = text.find('\n', pos);
      if (end == std::string_view::npos) end = text.size();
      std::string line(text.substr(pos + 1, end - pos - 1));
      if (!line.empty() && line.back() == '\r') line.pop_back();
      const std::size_t colon = line.find(':');
      auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(' ');
        const auto e = s.find_last_not_of(' ');
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
      };
      if (colon != std::string::npos) table.meta.emplace_back(trim(line.substr(0, colon)), trim(line.substr(colon + 1)));
      pos = end + 1;
      continue;
    }
    std::vector<std::string> row;
    std::string field;
    bool quoted = false, done = false;
    while (!done) {
      if (pos >= text.size()) {
        row.push_back(field);
        break;
      }
      const char ch = text[pos++];
      if (quoted) {
        if (ch == '"') {
          if (pos < text.size() && text[pos] == '"') {
            field += '"';
            ++pos;
          } else {
            quoted = false;
          }
        } else {
          field += ch;
        }
      } else if (ch == '"') {
        quoted = true;
      } else if (ch == ',') {
        row.push_back(std::move(field));
        field.clear();
      } else if (ch == '\r' || ch == '\n') {
        if (ch == '\r' && pos < text.size() && text[pos] == '\n') ++pos;
        row.push_back(std::move(field));
        done = true;
      } else {
        field += ch;
      }
    }
    if (!have_header) {
      table.header = std::move(row);
      have_header = true;
    } else {
      if (row.size() != table.header.size()) throw std::runtime_error("csv: row width differs from header");
      table.rows.push_back(std::move(row));
    }
  }
  return table;
}

CsvTable read_csv_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str());
}

// ---------------------------------------------------------------- experiments

namespace {

struct Cell {
  std::vector<std::string> values;
  std::size_t n = 0, k = 0, m = 0;
  double theta = 0.0, epsilon = 0.0;
};

struct Plan {
  std::vector<std::string> param_names, metric_names;
  std::vector<Cell> cells;
};

Plan make_plan(const ExperimentConfig& c) {
  Plan plan;
  auto sz = [](std::size_t v) { return std::to_string(v); };
  switch (c.kind) {
    case ExperimentKind::Recover:
      if (c.mode == "exact") {
        plan.param_names = {"n", "k", "m"};
        plan.metric_names = {"success", "error", "residual"};
      } else {
        plan.param_names = {"n", "k", "epsilon"};
        plan.metric_names = {"converged", "error", "residual", "iterations"};
      }
      break;
    case ExperimentKind::Phase:
      plan.param_names = {"n", "k", "m"};
      plan.metric_names = {"success", "error", "residual"};
      break;
    case ExperimentKind::Empirical:
      plan.param_names = {"n", "k"};
      plan.metric_names = {"sup_z"};
      break;
    case ExperimentKind::Neighborly:
      plan.param_names = {"n", "k", "m"};
      plan.metric_names = {"neighborly", "queries_checked", "degenerate_queries", "counterexample"};
      break;
    case ExperimentKind::Width:
      plan.param_names = {"n"};
      plan.metric_names = {"value", "std_err"};
      break;
    case ExperimentKind::RStar:
      plan.param_names = {"n", "k", "theta"};
      plan.metric_names = {"value", "crossed", "grid_index"};
      break;
  }
  const bool approx = c.kind == ExperimentKind::Recover && c.mode == "approx";
  const std::vector<std::size_t> one = {0};
  const auto& ks = c.k_grid.empty() ? one : c.k_grid;
  const auto& ms = (c.m_grid.empty() || approx) ? one : c.m_grid;
  const std::vector<double> zero = {0.0};
  const auto& thetas = c.theta_grid.empty() ? zero : c.theta_grid;
  const auto& eps = (c.epsilon_grid.empty() || !approx) ? zero : c.epsilon_grid;
  for (std::size_t n : c.n_grid)
    for (std::size_t k : ks)
      for (std::size_t m : ms)
        for (double th : thetas)
          for (double e : eps) {
            Cell cell{{}, n, k, m, th, e};
            for (const auto& p : plan.param_names) {
              if (p == "n") cell.values.push_back(sz(n));
              else if (p == "k") cell.values.push_back(sz(k));
              else if (p == "m") cell.values.push_back(sz(m));
              else if (p == "theta") cell.values.push_back(format_real(th));
              else if (p == "epsilon") cell.values.push_back(format_real(e));
            }
            plan.cells.push_back(std::move(cell));
          }
  return plan;
}

std::vector<std::string> run_trial(const ExperimentConfig& c, const Cell& cell, std::uint64_t seed) {
  RngState rng{seed, 0};
  const Ensemble ens = Ensemble::make(c.ensemble);
  std::vector<std::string> out;
  switch (c.kind) {
    case ExperimentKind::Recover:
    case ExperimentKind::Phase: {
      const SamplingMatrix gamma = sample_matrix(ens, cell.k, cell.n, rng);
      if (c.kind == ExperimentKind::Recover && c.mode == "approx") {
        const auto set = parse_set(c.set, cell.n);
        if (!set) throw std::invalid_argument("unknown set \"" + c.set + "\"");
        Vector v;
        if (std::holds_alternative<L1Ball>(set->shape)) {
          v = random_l1_sphere_point(cell.n, rng);
        } else {
          v.assign(cell.n, 0.0);
          rng.fill_gaussian(v);
          const double nv = norm2(v);
          for (double& x : v) x /= nv;
        }
        const double r = set_radius(*set);
        for (double& x : v) x *= r;
        const ApproxResult res = approx_reconstruct(gamma, multiply(gamma, v), *set, cell.epsilon, c.max_iters);
        Vector d(cell.n);
        for (std::size_t i = 0; i < cell.n; ++i) d[i] = res.t[i] - v[i];
        out = {res.converged ? "1" : "0", format_real(norm2(d)), format_real(res.residual),
               std::to_string(res.iterations)};
      } else {
        if (cell.m > cell.n) throw std::invalid_argument("m exceeds n");
        const SparseVector z = random_sign_sparse(cell.n, cell.m, rng);
        const RecoveryTrial t = exact_recover(gamma, z);
        out = {t.outcome == RecoveryOutcome::ExactSuccess ? "1" : "0", format_real(t.linf_error),
               format_real(t.residual)};
      }
      break;
    }
    case ExperimentKind::Empirical: {
      const SamplingMatrix gamma = sample_matrix(ens, cell.k, cell.n, rng);
      out = {format_real(process_eval(FunctionalClass::canonical_basis(cell.n), gamma).sup_abs_z)};
      break;
    }
    case ExperimentKind::Neighborly: {
      const SamplingMatrix gamma = sample_matrix(ens, cell.k, cell.n, rng);
      ScanOptions opt;
      opt.exhaustive = c.sampled_queries == 0;
      opt.num_queries = c.sampled_queries;
      opt.strict_lt = c.strict_lt;
      opt.rng = rng;
      const NeighborlyVerdict v = neighborly_scan(gamma, cell.m, c.symmetric, opt);
      out = {v.neighborly ? "1" : "0", std::to_string(v.queries_checked), std::to_string(v.degenerate_queries),
             v.counterexample ? v.counterexample->to_string() : ""};
      break;
    }
    case ExperimentKind::Width: {
      const auto set = parse_set(c.set, cell.n);
      if (!set) throw std::invalid_argument("unknown set \"" + c.set + "\"");
      const WidthEstimate w = gaussian_width(*set, c.samples, rng);
      out = {format_real(w.value), format_real(w.std_err)};
      break;
    }
    case ExperimentKind::RStar: {
      const auto set = parse_set(c.set, cell.n);
      if (!set) throw std::invalid_argument("unknown set \"" + c.set + "\"");
      RStarOptions opt;
      opt.c_norm = c.c_norm;
      opt.num_samples = c.samples;
      const RStarResult r = r_star(cell.theta, *set, cell.k, c.alpha, opt, rng);
      out = {format_real(r.value), r.crossed ? "1" : "0", std::to_string(r.grid_index)};
      break;
    }
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> header_meta(const ExperimentConfig& c, const Plan& plan) {
  std::string params;
  for (std::size_t i = 0; i < plan.param_names.size(); ++i) params += (i ? "," : "") + plan.param_names[i];
  return {{"experiment", std::string(to_string(c.kind))},
          {"name", c.name},
          {"config_hash", c.hash()},
          {"base_seed", std::to_string(c.base_seed)},
          {"ensemble", std::string(to_string(c.ensemble))},
          {"version", version_string()},
          {"parameters", params}};
}

}  // namespace

ExperimentOutputs execute_experiment(const ExperimentConfig& config) {
  config.validate();
  const Plan plan = make_plan(config);
  const std::size_t total = plan.cells.size() * config.trials;

  ExperimentOutputs out;
  out.parameter_names = plan.param_names;
  out.metric_names = plan.metric_names;
  out.records.resize(total);
  parallel_for(total, config.threads, [&](std::size_t i) {
    const Cell& cell = plan.cells[i / config.trials];
    TrialRecord& rec = out.records[i];
    rec.trial = i;
    rec.seed = config.base_seed + i;
    rec.parameters = cell.values;
    const auto start = std::chrono::steady_clock::now();
    rec.metrics = run_trial(config, cell, rec.seed);
    rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  });

  if (config.kind == ExperimentKind::Phase) {
    // Rows are (n, k) pairs in grid order, columns the m grid.
    const std::size_t nm = config.m_grid.size();
    for (std::size_t row = 0; row * nm < plan.cells.size(); ++row) {
      std::vector<double> rates;
      for (std::size_t j = 0; j < nm; ++j) {
        const std::size_t cell = row * nm + j;
        double succ = 0.0;
        for (std::size_t t = 0; t < config.trials; ++t) succ += out.records[cell * config.trials + t].metrics[0] == "1";
        rates.push_back(config.trials ? succ / static_cast<double>(config.trials) : std::nan(""));
      }
      out.success_matrix.push_back(std::move(rates));
    }
  }
  return out;
}

ExperimentOutputs run_experiment(const ExperimentConfig& config) {
  ExperimentOutputs out = execute_experiment(config);
  const Plan plan = make_plan(config);
  const auto meta = header_meta(config, plan);
  CsvTable metrics{meta, {"trial", "seed"}, {}};
  metrics.header.insert(metrics.header.end(), plan.param_names.begin(), plan.param_names.end());
  metrics.header.insert(metrics.header.end(), plan.metric_names.begin(), plan.metric_names.end());
  CsvTable timing{meta, {"trial", "seed", "wall_ms"}, {}};
  for (const auto& rec : out.records) {
    std::vector<std::string> row = {std::to_string(rec.trial), std::to_string(rec.seed)};
    row.insert(row.end(), rec.parameters.begin(), rec.parameters.end());
    row.insert(row.end(), rec.metrics.begin(), rec.metrics.end());
    metrics.rows.push_back(std::move(row));
    timing.rows.push_back({std::to_string(rec.trial), std::to_string(rec.seed), format_real(rec.wall_ms)});
  }

  std::optional<CsvTable> phase_matrix;
  if (config.kind == ExperimentKind::Phase) {
    const std::size_t nm = config.m_grid.size();
    CsvTable matrix{meta, {"n", "k"}, {}};
    for (std::size_t m : config.m_grid) matrix.header.push_back("m=" + std::to_string(m));
    for (std::size_t row = 0; row < out.success_matrix.size(); ++row) {
      std::vector<std::string> line = {std::to_string(plan.cells[row * nm].n), std::to_string(plan.cells[row * nm].k)};
      for (double r : out.success_matrix[row]) line.push_back(format_real(r));
      matrix.rows.push_back(std::move(line));
    }
    out.matrix = config.output_dir / (config.name + ".matrix.csv");
    phase_matrix = std::move(matrix);
  }

  out.csv = config.output_dir / (config.name + ".csv");
  out.timing = config.output_dir / (config.name + ".timing.csv");
  out.manifest = config.output_dir / (config.name + ".manifest.json");
  std::vector<fs::path> written;
  try {
    fs::create_directories(config.output_dir);
    if (phase_matrix) {
      written.push_back(out.matrix);
      write_csv_file(*phase_matrix, out.matrix);
    }
    written.push_back(out.csv);
    write_csv_file(metrics, out.csv);
    written.push_back(out.timing);
    write_csv_file(timing, out.timing);

    const LpTolerances lp_tol;
    json manifest;
    manifest["config"] = json::parse(config.to_json());
    manifest["config_hash"] = config.hash();
    manifest["version"] = version_string();
    manifest["tolerances"] = {{"lp_feasibility", lp_tol.feasibility},
                              {"lp_optimality", lp_tol.optimality},
                              {"lp_pivot", lp_tol.pivot},
                              {"exact_recovery_relative", 1e-6},
                              {"face_margin", kFaceMarginThreshold}};
    json files = json::array({out.csv.filename().string(), out.timing.filename().string()});
    if (!out.matrix.empty()) files.push_back(out.matrix.filename().string());
    manifest["outputs"] = files;
    written.push_back(out.manifest);
    std::ofstream mf(out.manifest, std::ios::binary);
    if (!mf) throw std::runtime_error("cannot write " + out.manifest.string());
    mf << manifest.dump(2) << '\n';
    if (!mf) throw std::runtime_error("write failed: " + out.manifest.string());
  } catch (...) {
    std::error_code ec;
    for (const auto& p : written)
      if (fs::is_regular_file(p, ec)) fs::remove(p, ec);
    throw;
  }
  return out;
}

// ---------------------------------------------------------------- summarize

namespace {

std::optional<double> to_number(const std::string& s) {
  if (s.empty()) return std::nullopt;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) return std::nullopt;
  return v;
}

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string part; std::getline(ss, part, ',');)
    if (!part.empty()) out.push_back(part);
  return out;
}

}  // namespace

CsvTable Summary::slope_table() const {
  CsvTable t{table.meta, {"metric", "parameter", "group", "points", "slope", "slope_std_err", "intercept"}, {}};
  for (const auto& s : slopes)
    t.rows.push_back({s.metric, s.parameter, s.group, std::to_string(s.points), format_real(s.slope),
                      format_real(s.slope_std_err), format_real(s.intercept)});
  return t;
}

Summary summarize_tables(const std::vector<CsvTable>& tables) {
  if (tables.empty()) throw std::invalid_argument("summarize: no inputs");
  const CsvTable& first = tables.front();
  const std::string params_meta = first.meta_value("parameters");
  for (const auto& t : tables) {
    if (t.header != first.header || t.meta_value("parameters") != params_meta ||
        t.meta_value("experiment") != first.meta_value("experiment"))
      throw SchemaMismatch("summarize: inputs do not share one schema");
  }
  const std::vector<std::string> params = split_commas(params_meta);
  std::vector<std::size_t> param_cols, metric_cols;
  for (const auto& p : params) {
    try {
      param_cols.push_back(first.column(p));
    } catch (const std::out_of_range&) {
      throw SchemaMismatch("summarize: parameter column \"" + p + "\" missing");
    }
  }
  for (std::size_t c = 0; c < first.header.size(); ++c) {
    const auto& name = first.header[c];
    if (name == "trial" || name == "seed") continue;
    if (std::find(param_cols.begin(), param_cols.end(), c) != param_cols.end()) continue;
    bool numeric = true;
    for (const auto& t : tables)
      for (const auto& row : t.rows) numeric = numeric && to_number(row[c]).has_value();
    if (numeric) metric_cols.push_back(c);
  }

  // Cells in order of first appearance.
  std::vector<std::vector<std::string>> keys;
  std::map<std::vector<std::string>, std::vector<std::vector<double>>> values;
  for (const auto& t : tables) {
    for (const auto& row : t.rows) {
      std::vector<std::string> key;
      for (std::size_t c : param_cols) key.push_back(row[c]);
      auto [it, inserted] = values.try_emplace(key, metric_cols.size());
      if (inserted) keys.push_back(key);
      for (std::size_t j = 0; j < metric_cols.size(); ++j) it->second[j].push_back(*to_number(row[metric_cols[j]]));
    }
  }

  Summary s;
  s.table.meta = {{"experiment", first.meta_value("experiment")},
                  {"summary_of", std::to_string(tables.size()) + " file(s)"},
                  {"parameters", params_meta}};
  s.table.header = params;
  s.table.header.push_back("count");
  for (std::size_t c : metric_cols)
    for (const char* stat : {"_mean", "_std", "_q05", "_median", "_q95"}) s.table.header.push_back(first.header[c] + stat);

  std::vector<std::vector<double>> means(keys.size());
  for (std::size_t i = 0; i < keys.size(); ++i) {
    const auto& cols = values.at(keys[i]);
    std::vector<std::string> row = keys[i];
    row.push_back(std::to_string(cols.front().size()));
    for (const auto& v : cols) {
      const double mu = mean(v);
      means[i].push_back(mu);
      for (double x : {mu, sample_std(v), quantile(v, 0.05), median(v), quantile(v, 0.95)}) row.push_back(format_real(x));
    }
    s.table.rows.push_back(std::move(row));
  }

  for (std::size_t p = 0; p < params.size(); ++p) {
    bool numeric = true;
    for (const auto& key : keys) {
      const auto v = to_number(key[p]);
      numeric = numeric && v && *v > 0.0;
    }
    if (!numeric) continue;
    // Group cells by the remaining parameters.
    std::vector<std::vector<std::string>> group_keys;
    std::map<std::vector<std::string>, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < keys.size(); ++i) {
      std::vector<std::string> g;
      for (std::size_t q = 0; q < params.size(); ++q)
        if (q != p) g.push_back(params[q] + "=" + keys[i][q]);
      auto [it, inserted] = groups.try_emplace(g);
      if (inserted) group_keys.push_back(g);
      it->second.push_back(i);
    }
    for (const auto& g : group_keys) {
      const auto& members = groups.at(g);
      std::string label;
      for (std::size_t q = 0; q < g.size(); ++q) label += (q ? ";" : "") + g[q];
      for (std::size_t j = 0; j < metric_cols.size(); ++j) {
        std::vector<double> x, y;
        for (std::size_t i : members) {
          const double mu = means[i][j];
          if (!(mu > 0.0) || !std::isfinite(mu)) {
            x.clear();
            break;
          }
          x.push_back(std::log(*to_number(keys[i][p])));
          y.push_back(std::log(mu));
        }
        if (x.size() < 2 || *std::max_element(x.begin(), x.end()) == *std::min_element(x.begin(), x.end())) continue;
        const LineFit fit = fit_line(x, y);
        s.slopes.push_back({first.header[metric_cols[j]], params[p], label, fit.slope, fit.slope_std_err, fit.intercept,
                            x.size()});
      }
    }
  }
  return s;
}

Summary summarize(const std::vector<fs::path>& csv_paths) {
  std::vector<CsvTable> tables;
  for (const auto& p : csv_paths) tables.push_back(read_csv_file(p));
  return summarize_tables(tables);
}

}  // namespace sgrecon
