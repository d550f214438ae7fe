#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "wiener/estimate.hpp"
#include "wiener/signals.hpp"
#include "wiener/system.hpp"

namespace wiener {

enum class InputKind { Gaussian, Uniform };

/// Monte Carlo configuration. Serialized as flat `key = value` text whose keys
/// are exactly the field names below; unknown keys are rejected.
struct ExperimentConfig {
  double theta_o = 0.5;
  double sigma_v2 = 0.2;
  double sigma_e2 = 0.1;
  double sigma_u2 = 1.0 / 3.0;
  InputKind input_kind = InputKind::Gaussian;
  std::size_t N = 1000;
  std::size_t realizations = 1000;
  std::vector<Method> methods{Method::ML, Method::PEM_W, Method::II0, Method::II1_UNW, Method::II1_W};
  Seed master_seed{1};
  std::size_t ml_quad_order = 1000;
  /// Centre the ML quadrature on each term's posterior mode.
  bool ml_adaptive = true;
  /// Simulations per realization for II1_SIM; each gets its own input draw.
  std::size_t S = 10;
  /// Run ML only on the first 200 realizations with a 200-node rule.
  bool desk_scale = false;

  void validate() const;
  SystemSpec system_spec() const;
  /// Quadrature order and realization count actually used for the ML column.
  std::size_t effective_ml_quad_order() const;
  std::size_t effective_ml_realizations() const;
};

ExperimentConfig parse_config(std::istream& is);
/// Reads a `key = value` config, or the config block of a JSON ledger (.json).
ExperimentConfig load_config(const std::string& path);
void write_config(std::ostream& os, const ExperimentConfig& config);

struct SeedLedgerEntry {
  std::size_t realization = 0;
  Seed input;
  Seed process_noise;
  Seed measurement_noise;
  Seed simulation;        // noise streams of the simulated map
  Seed simulation_input;  // index s gives the input of simulation s
};

SeedLedgerEntry ledger_entry(const ExperimentConfig& config, std::size_t realization);

/// Fresh input and noise for realization r, simulated through the true system.
DataRecord generate_realization(const ExperimentConfig& config, std::size_t realization);

/// One method on one realization's data, as the harness runs it.
EstimateReport run_method(const ExperimentConfig& config, Method method, const DataRecord& data,
                          std::size_t realization);

struct RawRow {
  std::size_t realization = 0;
  Method method = Method::ML;
  bool ok = true;
  double theta_hat = 0.0;
  double predicted_std = 0.0;
  std::string diagnostic;
};

struct MethodSummary {
  Method method = Method::ML;
  std::size_t runs = 0;      // successful realizations
  std::size_t failures = 0;
  double mean = 0.0;
  double std = 0.0;          // (R - 1) divisor
  double wall_time_s = 0.0;  // summed over realizations
  double mean_predicted_std = 0.0;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<MethodSummary> summaries;
  std::vector<RawRow> raw;  // sorted by (realization, method order in config)
  std::vector<SeedLedgerEntry> ledger;

  const MethodSummary& summary(Method m) const;
  /// Successful theta estimates of one method in realization order.
  std::vector<double> thetas(Method m) const;
};

using ProgressCallback = std::function<void(std::size_t done, std::size_t total)>;

/// Runs every configured method on every realization. Realizations are spread
/// over `threads` workers (0 = hardware concurrency); results do not depend
/// on the thread count.
ExperimentResult run_experiment(const ExperimentConfig& config, unsigned threads = 0,
                                const ProgressCallback& progress = {});

/// Mean and (R - 1)-divisor standard deviation.
std::pair<double, double> mean_std(const std::vector<double>& xs);

/// Standard deviation of theta_hat for f(x) = x: sqrt((sv2 + se2) / (su2 N)).
double linear_baseline_std(const ExperimentConfig& config);

enum class ReportFormat { CSV, JSON };

struct ReportFiles {
  std::filesystem::path summary;
  std::filesystem::path raw;
  std::filesystem::path ledger;  // config; for JSON also the seed table
  std::filesystem::path seeds;   // CSV only: per-realization seeds
};

/// Writes summary, per-realization raw table and config + seed ledger into dir
/// (summary.csv, raw.csv, ledger.cfg, seeds.csv or summary.json, raw.json, ledger.json).
ReportFiles emit_report(const ExperimentResult& result, ReportFormat format, const std::filesystem::path& dir);

/// Reads a raw table written by emit_report (format picked from the extension).
std::vector<RawRow> read_raw(const std::filesystem::path& path);

}  // namespace wiener
