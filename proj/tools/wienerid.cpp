// wienerid: simulate data, run single estimators, and run Monte Carlo
// comparisons of the Wiener-system estimators.

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <string>

#include "wiener/error.hpp"
#include "wiener/experiment.hpp"

using namespace wiener;
namespace fs = std::filesystem;

namespace {

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format = "csv";
  bool desk_scale = false;
};

void add_common(CLI::App* cmd, Common& c, bool with_out) {
  cmd->add_option("--config", c.config_path, "Experiment config (key = value text or a JSON ledger)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--seed", c.seed, "Override the master seed");
  if (with_out) cmd->add_option("--out", c.out, "Output directory");
  cmd->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  cmd->add_flag("--desk-scale", c.desk_scale, "Likelihood column on 200 realizations with a 200-node rule");
}

ExperimentConfig load(const Common& c) {
  ExperimentConfig config = c.config_path.empty() ? ExperimentConfig{} : load_config(c.config_path);
  if (c.seed) config.master_seed = Seed{*c.seed};
  if (c.desk_scale) config.desk_scale = true;
  config.validate();
  return config;
}

ReportFormat report_format(const std::string& f) { return f == "json" ? ReportFormat::JSON : ReportFormat::CSV; }

std::string num(double x, const char* f = "%.6f") {
  if (!std::isfinite(x)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

int cmd_simulate(const Common& c, std::size_t realization) {
  const ExperimentConfig config = load(c);
  const DataRecord data = generate_realization(config, realization);
  const fs::path dir = c.out.empty() ? fs::path(".") : fs::path(c.out);
  fs::create_directories(dir);
  const fs::path path = dir / "data.csv";
  write_csv(path.string(), data);
  std::cout << "wrote " << path.string() << " (N = " << data.N() << ", realization " << realization << ")\n";
  return 0;
}

int cmd_estimate(const Common& c, const std::string& data_path, const std::string& method_tag, std::size_t realization) {
  const ExperimentConfig config = load(c);
  const Method method = parse_method(method_tag);
  const DataRecord data = read_csv(data_path);
  const EstimateReport r = run_method(config, method, data, realization);
  if (c.format == "json") {
    nlohmann::json j{{"method", std::string(to_string(r.method))},
                     {"theta_hat", r.theta_hat},
                     {"predicted_std", std::isfinite(r.predicted_std) ? nlohmann::json(r.predicted_std) : nlohmann::json(nullptr)},
                     {"cost", r.cost},
                     {"iterations", r.iterations},
                     {"evaluations", r.evaluations},
                     {"degenerate", r.degenerate},
                     {"N", data.N()}};
    std::cout << j.dump(2) << '\n';
  } else {
    std::cout << "method,theta_hat,predicted_std,cost,iterations,evaluations,degenerate,N\n"
              << to_string(r.method) << ',' << num(r.theta_hat, "%.17g") << ',' << num(r.predicted_std, "%.17g") << ','
              << num(r.cost, "%.17g") << ',' << r.iterations << ',' << r.evaluations << ','
              << (r.degenerate ? 1 : 0) << ',' << data.N() << '\n';
  }
  if (r.degenerate) {
    std::cerr << "wienerid: error: " << to_string(r.method) << " criterion is flat over the search bracket\n";
    return 1;
  }
  return 0;
}

int cmd_bench(const Common& c, std::optional<std::size_t> realizations, unsigned threads, bool quiet) {
  ExperimentConfig config = load(c);
  if (realizations) config.realizations = *realizations;
  config.validate();
  ProgressCallback progress;
  if (!quiet)
    progress = [](std::size_t done, std::size_t total) {
      if (done == total || done % 50 == 0) std::cerr << "\r" << done << " / " << total << " realizations" << std::flush;
      if (done == total) std::cerr << '\n';
    };
  const ExperimentResult result = run_experiment(config, threads, progress);
  const fs::path dir = c.out.empty() ? fs::path("results") : fs::path(c.out);
  const ReportFiles files = emit_report(result, report_format(c.format), dir);

  std::cout << "method    runs  fail    mean      std   pred.std   time[s]\n";
  bool too_many_failures = false;
  for (const auto& s : result.summaries) {
    char line[160];
    std::snprintf(line, sizeof line, "%-8s %5zu %5zu %8s %8s %10s %9.1f\n", std::string(to_string(s.method)).c_str(),
                  s.runs, s.failures, num(s.mean, "%.4f").c_str(), num(s.std, "%.4f").c_str(),
                  num(s.mean_predicted_std, "%.4f").c_str(), s.wall_time_s);
    std::cout << line;
    too_many_failures |= static_cast<double>(s.failures) > 0.01 * static_cast<double>(s.runs + s.failures);
  }
  std::cout << "linear-case baseline std " << num(linear_baseline_std(config), "%.4f") << '\n';
  std::cout << "wrote " << files.summary.string() << ", " << files.raw.string() << ", " << files.ledger.string();
  if (!files.seeds.empty()) std::cout << ", " << files.seeds.string();
  std::cout << '\n';
  if (too_many_failures) {
    std::cerr << "wienerid: error: more than 1% of the realizations failed for at least one method\n";
    return 1;
  }
  return 0;
}

int cmd_baseline(const Common& c) {
  const ExperimentConfig config = load(c);
  ExperimentConfig unit = config;
  unit.sigma_u2 = 1.0;
  if (c.format == "json") {
    std::cout << nlohmann::json{{"baseline_std", linear_baseline_std(config)},
                                {"baseline_std_unit_input_variance", linear_baseline_std(unit)}}
                     .dump(2)
              << '\n';
  } else {
    std::cout << "baseline_std," << num(linear_baseline_std(config), "%.17g") << '\n'
              << "baseline_std_unit_input_variance," << num(linear_baseline_std(unit), "%.17g") << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Estimation of a stochastic Wiener system: ML, PEM and indirect inference"};
  app.require_subcommand(1);

  Common sim_opts, est_opts, bench_opts, base_opts;
  std::size_t sim_realization = 0, est_realization = 0;
  auto* simulate = app.add_subcommand("simulate", "Write one simulated data record (data.csv) from a config");
  add_common(simulate, sim_opts, true);
  simulate->add_option("--realization", sim_realization, "Realization index whose seeds are used");

  std::string data_path, method = "II1_W";
  auto* estimate = app.add_subcommand("estimate", "Run one estimator on a data record");
  add_common(estimate, est_opts, false);
  estimate->add_option("--data", data_path, "Data record CSV (t,u,y)")->required()->check(CLI::ExistingFile);
  estimate->add_option("--method", method, "ML, PEM, PEM_W, II0, II1_UNW, II1_W or II1_SIM");
  estimate->add_option("--realization", est_realization, "Realization index seeding the simulated map");

  std::optional<std::size_t> realizations;
  unsigned threads = 0;
  bool quiet = false;
  auto* bench = app.add_subcommand("bench", "Monte Carlo comparison of the configured methods");
  add_common(bench, bench_opts, true);
  bench->add_option("--realizations", realizations, "Override the realization count");
  bench->add_option("--threads", threads, "Worker threads (0 = all cores)");
  bench->add_flag("--quiet", quiet, "No progress output");

  auto* baseline = app.add_subcommand("baseline", "Standard deviation of the estimate for a linear f");
  add_common(baseline, base_opts, false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*simulate) return cmd_simulate(sim_opts, sim_realization);
    if (*estimate) return cmd_estimate(est_opts, data_path, method, est_realization);
    if (*bench) return cmd_bench(bench_opts, realizations, threads, quiet);
    if (*baseline) return cmd_baseline(base_opts);
  } catch (const std::exception& e) {
    std::cerr << "wienerid: error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
