#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sgrecon/ensembles.hpp"

namespace sgrecon {

enum class ExperimentKind { Recover, Phase, Empirical, Neighborly, Width, RStar };

std::string_view to_string(ExperimentKind kind);

/// Config error carrying the 1-based line of the offending JSON text (0 if unknown).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::size_t line, const std::string& message);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Recover;
  std::string name;
  EnsembleKind ensemble = EnsembleKind::Gaussian;
  std::vector<std::size_t> n_grid, k_grid, m_grid;
  std::vector<double> theta_grid, epsilon_grid, p_grid;
  std::string mode = "exact";  // recover: exact | approx
  std::string set = "l1";      // width / rstar
  std::size_t samples = 256;
  double alpha = 1.0;
  double c_norm = 1.0;
  bool symmetric = false;
  bool strict_lt = false;
  std::size_t sampled_queries = 0;  // neighborly: 0 means exhaustive
  std::size_t max_iters = 10000;
  std::size_t trials = 0;
  std::uint64_t base_seed = 0;
  std::size_t threads = 1;
  std::filesystem::path output_dir = ".";

  /// Throws ConfigError (line 0) when a grid the experiment needs is empty.
  void validate() const;
  /// Canonical JSON form; the config hash is computed over it.
  std::string to_json() const;
  std::string hash() const;
};

/// Parses and schema-checks a JSON config. Unknown keys, wrong types and
/// missing required keys raise ConfigError with the line of the key.
ExperimentConfig parse_config(std::string_view json_text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// RFC-4180 table with leading '#' comment lines (key: value metadata).
struct CsvTable {
  std::vector<std::pair<std::string, std::string>> meta;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string meta_value(std::string_view key) const;
  std::size_t column(std::string_view name) const;  // throws std::out_of_range
};

std::string format_real(double x);
std::string csv_escape(std::string_view field);
void write_csv(const CsvTable& table, std::ostream& os);
void write_csv_file(const CsvTable& table, const std::filesystem::path& path);
CsvTable parse_csv(std::string_view text);
CsvTable read_csv_file(const std::filesystem::path& path);

struct TrialRecord {
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> parameters;
  std::vector<std::string> metrics;
  double wall_ms = 0.0;
};

struct ExperimentOutputs {
  std::filesystem::path csv, timing, manifest;
  std::filesystem::path matrix;  // phase experiments only
  std::vector<std::string> parameter_names, metric_names;
  std::vector<TrialRecord> records;
  /// Success rates of a phase experiment, rows over k, columns over m.
  std::vector<std::vector<double>> success_matrix;
};

/// Runs every trial in memory without writing files.
ExperimentOutputs execute_experiment(const ExperimentConfig& config);

/// Trial i (over the flattened parameter grid, trials innermost) runs with
/// seed base_seed + i. Writes <name>.csv (metrics), <name>.timing.csv
/// (wall times) and <name>.manifest.json into output_dir, plus
/// <name>.matrix.csv for phase experiments. Partial outputs are removed if
/// any trial throws.
ExperimentOutputs run_experiment(const ExperimentConfig& config);

class SchemaMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SlopeFit {
  std::string metric, parameter, group;
  double slope = 0.0, slope_std_err = 0.0, intercept = 0.0;
  std::size_t points = 0;
};

struct Summary {
  CsvTable table;
  std::vector<SlopeFit> slopes;
  CsvTable slope_table() const;
};

/// Aggregates experiment CSVs with identical schemas per parameter cell:
/// count, mean, std, 5%/50%/95% quantiles of each numeric metric, and
/// log-log slopes of metric means against each numeric parameter that varies
/// with the other parameters held fixed.
Summary summarize(const std::vector<std::filesystem::path>& csv_paths);
Summary summarize_tables(const std::vector<CsvTable>& tables);

std::string version_string();

}  // namespace sgrecon
