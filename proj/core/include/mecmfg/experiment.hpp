#pragma once

// Declarative experiment front end: loads a JSON experiment description,
// validates it, dispatches analytic evaluation / simulation / equilibrium
// solving / parameter sweeps, and emits results.csv plus a run manifest that
// reproduces the run bit-for-bit (wall-clock column aside).

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mecmfg/des.hpp"
#include "mecmfg/mfg.hpp"
#include "mecmfg/types.hpp"

namespace mecmfg::cli {

enum class Mode { Aoi, Simulate, Solve, Sweep };

const char* mode_name(Mode mode);
std::optional<Mode> mode_from_name(const std::string& name);

struct Diagnostic {
  std::string path;     // config location, e.g. system.profiles[0].eta
  std::string message;
};

struct SimSettings {
  std::optional<double> horizon;
  std::optional<std::uint64_t> events;
  double warmup_fraction = 0.1;
  int replications = 1;
  std::uint64_t seed = 1;
};

struct SweepSpec {
  std::string path;
  std::vector<double> values;  // nonempty, strictly monotone
  Mode inner = Mode::Solve;
  bool warm_start = true;
};

struct ExperimentConfig {
  int schema_version = 1;
  Mode mode = Mode::Aoi;
  SystemConfig system;
  std::vector<Policy> policies;  // one per profile; initial point for solve
  std::optional<MeanField> initial_rho;
  mfg::SolverSettings solver;
  SimSettings sim;
  std::optional<SweepSpec> sweep;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One flat output record; the CSV schema (header order) is stable.
struct ResultRow {
  std::string sweep_param;  // empty outside sweeps
  std::optional<double> sweep_value;
  std::string type_id;
  Policy policy;
  MeanField rho;
  PerClass<double> aoi{};
  double power = 0.0;
  double cost = 0.0;
  bool converged = true;
  int outer_iters = 0;
  double wall_ms = 0.0;
};

std::string results_csv_header();
std::string results_csv_line(const ResultRow& row);

struct RunOptions {
  std::optional<Mode> mode;            // subcommand; overrides config.mode
  std::vector<std::string> overrides;  // "path=value", applied in order
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;   // overrides solver and sim seeds
  int jobs = 0;                        // 0 = hardware concurrency
};

struct RunOutcome {
  int exit_code = 0;  // 0 ok, 2 config error, 3 non-convergence
  std::vector<ResultRow> rows;
  std::vector<Diagnostic> diagnostics;
  std::string results_path;
  std::string manifest_path;
  std::string trace_path;  // solve mode only
};

/// Full schema and invariant check without executing. Accepts either a raw
/// experiment config or a manifest produced by run(). Parse failures are
/// reported as diagnostics with line/column positions.
std::vector<Diagnostic> validate_config_file(const std::string& config_path,
                                             const std::vector<std::string>& overrides = {});

/// Loads, validates and executes one experiment. Results are written to
/// out_dir (results.csv, manifest.json, trace.csv in solve mode).
RunOutcome run_experiment(const std::string& config_path, const RunOptions& options);

/// Log verbosity, configured from the MECMFG_LOG environment variable
/// (debug, info, warn, error, silent). Messages go to stderr.
enum class LogLevel { Debug = 0, Info, Warn, Error, Silent };
void set_log_level(LogLevel level);
void set_log_level_from_env();
void log_message(LogLevel level, const std::string& message);

}  // namespace mecmfg::cli
