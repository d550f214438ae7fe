#include "wiener/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <istream>
#include <json.hpp>
#include <map>
#include <mutex>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>

#include "text.hpp"
#include "wiener/error.hpp"
#include "wiener/indirect.hpp"
#include "wiener/ml.hpp"
#include "wiener/pem.hpp"

namespace wiener {
namespace {

constexpr std::size_t kDeskMlOrder = 200;
constexpr std::size_t kDeskMlRealizations = 200;

std::string_view to_string(InputKind k) { return k == InputKind::Gaussian ? "gaussian" : "uniform"; }

InputKind parse_input_kind(std::string_view s) {
  if (s == "gaussian" || s == "Gaussian") return InputKind::Gaussian;
  if (s == "uniform" || s == "Uniform") return InputKind::Uniform;
  throw InvalidArgument("unknown input_kind '" + std::string(s) + "' (gaussian|uniform)");
}

bool parse_bool(std::string_view s) {
  if (s == "true" || s == "1" || s == "on") return true;
  if (s == "false" || s == "0" || s == "off") return false;
  throw InvalidArgument("expected a boolean, got '" + std::string(s) + "'");
}

std::string methods_to_string(const std::vector<Method>& methods) {
  std::string out;
  for (std::size_t i = 0; i < methods.size(); ++i) {
    if (i) out += ',';
    out += to_string(methods[i]);
  }
  return out;
}

std::vector<Method> parse_methods(std::string_view s) {
  std::vector<Method> out;
  while (!s.empty()) {
    const auto comma = s.find(',');
    const auto tag = detail::trim(s.substr(0, comma));
    if (!tag.empty()) {
      const Method m = parse_method(tag);
      if (std::find(out.begin(), out.end(), m) != out.end())
        throw InvalidArgument("method " + std::string(tag) + " listed twice");
      out.push_back(m);
    }
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  return out;
}

bool runs_method(const ExperimentConfig& config, Method m, std::size_t r) {
  return m != Method::ML || r < config.effective_ml_realizations();
}

}  // namespace

std::string_view to_string(Method m) {
  switch (m) {
    case Method::ML: return "ML";
    case Method::PEM: return "PEM";
    case Method::PEM_W: return "PEM_W";
    case Method::II0: return "II0";
    case Method::II1_UNW: return "II1_UNW";
    case Method::II1_W: return "II1_W";
    case Method::II1_SIM: return "II1_SIM";
  }
  return "?";
}

Method parse_method(std::string_view tag) {
  for (Method m : {Method::ML, Method::PEM, Method::PEM_W, Method::II0, Method::II1_UNW, Method::II1_W,
                   Method::II1_SIM})
    if (tag == to_string(m)) return m;
  throw InvalidArgument("unknown method '" + std::string(tag) + "'");
}

void ExperimentConfig::validate() const {
  if (realizations < 1) throw InvalidArgument("realizations must be at least 1");
  if (N < 2) throw InvalidArgument("N must be at least 2");
  if (!(sigma_v2 >= 0.0) || !(sigma_e2 >= 0.0) || !(sigma_u2 >= 0.0))
    throw InvalidArgument("variances must be non-negative");
  if (!std::isfinite(theta_o)) throw InvalidArgument("theta_o must be finite");
  if (methods.empty()) throw InvalidArgument("at least one method is required");
  if (ml_quad_order < 1 || ml_quad_order > 2000) throw InvalidArgument("ml_quad_order must lie in [1, 2000]");
  if (S < 1) throw InvalidArgument("S must be at least 1");
}

SystemSpec ExperimentConfig::system_spec() const {
  SystemSpec spec;
  spec.fir = FirStructure::first_order_example();
  spec.theta = Eigen::VectorXd::Constant(1, theta_o);
  spec.nonlinearity = Nonlinearity::cubic();
  spec.sigma_v2 = sigma_v2;
  spec.sigma_e2 = sigma_e2;
  spec.input_dist = input_kind == InputKind::Gaussian ? Distribution::gaussian(sigma_u2) : Distribution::uniform(sigma_u2);
  return spec;
}

std::size_t ExperimentConfig::effective_ml_quad_order() const {
  return desk_scale ? std::min(ml_quad_order, kDeskMlOrder) : ml_quad_order;
}

std::size_t ExperimentConfig::effective_ml_realizations() const {
  return desk_scale ? std::min(realizations, kDeskMlRealizations) : realizations;
}

ExperimentConfig parse_config(std::istream& is) {
  ExperimentConfig config;
  std::string line;
  std::size_t lineno = 0;
  std::map<std::string, bool> seen;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    std::string_view sv = detail::trim(std::string_view(line).substr(0, hash));
    if (sv.empty()) continue;
    const auto eq = sv.find('=');
    if (eq == std::string_view::npos)
      throw InvalidArgument("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key(detail::trim(sv.substr(0, eq)));
    const std::string_view value = detail::trim(sv.substr(eq + 1));
    if (seen[key]) throw InvalidArgument("config line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    seen[key] = true;
    if (key == "theta_o") config.theta_o = detail::parse_double(value, key);
    else if (key == "sigma_v2") config.sigma_v2 = detail::parse_double(value, key);
    else if (key == "sigma_e2") config.sigma_e2 = detail::parse_double(value, key);
    else if (key == "sigma_u2") config.sigma_u2 = detail::parse_double(value, key);
    else if (key == "input_kind") config.input_kind = parse_input_kind(value);
    else if (key == "N") config.N = detail::parse_integer<std::size_t>(value, key);
    else if (key == "realizations") config.realizations = detail::parse_integer<std::size_t>(value, key);
    else if (key == "methods") config.methods = parse_methods(value);
    else if (key == "master_seed") config.master_seed = Seed{detail::parse_integer<std::uint64_t>(value, key)};
    else if (key == "ml_quad_order") config.ml_quad_order = detail::parse_integer<std::size_t>(value, key);
    else if (key == "ml_adaptive") config.ml_adaptive = parse_bool(value);
    else if (key == "S") config.S = detail::parse_integer<std::size_t>(value, key);
    else if (key == "desk_scale") config.desk_scale = parse_bool(value);
    else throw InvalidArgument("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
  }
  config.validate();
  return config;
}

void write_config(std::ostream& os, const ExperimentConfig& c) {
  os << "theta_o = " << detail::format_double(c.theta_o) << '\n'
     << "sigma_v2 = " << detail::format_double(c.sigma_v2) << '\n'
     << "sigma_e2 = " << detail::format_double(c.sigma_e2) << '\n'
     << "sigma_u2 = " << detail::format_double(c.sigma_u2) << '\n'
     << "input_kind = " << to_string(c.input_kind) << '\n'
     << "N = " << c.N << '\n'
     << "realizations = " << c.realizations << '\n'
     << "methods = " << methods_to_string(c.methods) << '\n'
     << "master_seed = " << c.master_seed.value << '\n'
     << "ml_quad_order = " << c.ml_quad_order << '\n'
     << "ml_adaptive = " << (c.ml_adaptive ? "true" : "false") << '\n'
     << "S = " << c.S << '\n'
     << "desk_scale = " << (c.desk_scale ? "true" : "false") << '\n';
}

SeedLedgerEntry ledger_entry(const ExperimentConfig& config, std::size_t r) {
  return {r, derive_seed(config.master_seed, r, StreamRole::Input),
          derive_seed(config.master_seed, r, StreamRole::ProcessNoise),
          derive_seed(config.master_seed, r, StreamRole::MeasurementNoise),
          derive_seed(config.master_seed, r, StreamRole::SimulationNoise),
          derive_seed(config.master_seed, r, StreamRole::SimulationInput)};
}

DataRecord generate_realization(const ExperimentConfig& config, std::size_t r) {
  config.validate();
  const SystemSpec spec = config.system_spec();
  const SeedLedgerEntry seeds = ledger_entry(config, r);
  DataRecord data;
  data.history = 1;
  data.u = gen_white(spec.input_dist, config.N + data.history, seeds.input);
  const auto v = gen_white(Distribution::gaussian(config.sigma_v2), config.N, seeds.process_noise);
  const auto e = gen_white(Distribution::gaussian(config.sigma_e2), config.N, seeds.measurement_noise);
  data.y = simulate(spec, data.u, v, e, data.history).y;
  return data;
}

EstimateReport run_method(const ExperimentConfig& config, Method method, const DataRecord& data, std::size_t r) {
  const SystemSpec spec = config.system_spec();
  switch (method) {
    case Method::ML: {
      MlSettings settings;
      settings.quad_order = config.effective_ml_quad_order();
      settings.adaptive = config.ml_adaptive;
      return ml_estimate(data, spec, settings);
    }
    case Method::PEM:
      return pem_estimate(data, spec, false);
    case Method::PEM_W:
      return pem_estimate(data, spec, true);
    case Method::II0:
      return zero_order_estimate(data, spec);
    case Method::II1_UNW:
      return to_estimate_report(first_order_estimate(data, spec, false), method);
    case Method::II1_W:
      return to_estimate_report(first_order_estimate(data, spec, true), method);
    case Method::II1_SIM: {
      const SeedLedgerEntry seeds = ledger_entry(config, r);
      std::vector<std::vector<double>> inputs;
      inputs.reserve(config.S);
      for (std::size_t s = 0; s < config.S; ++s)
        inputs.push_back(gen_white(spec.input_dist, data.u.size(), derive_seed(seeds.simulation_input, s, StreamRole::SimulationInput)));
      return to_estimate_report(first_order_simulated_estimate(data, spec, inputs, seeds.simulation), method);
    }
  }
  throw InvalidArgument("unhandled method");
}

std::pair<double, double> mean_std(const std::vector<double>& xs) {
  if (xs.empty()) return {std::nan(""), std::nan("")};
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  if (xs.size() < 2) return {mean, std::nan("")};
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(xs.size() - 1))};
}

const MethodSummary& ExperimentResult::summary(Method m) const {
  for (const auto& s : summaries)
    if (s.method == m) return s;
  throw InvalidArgument("method " + std::string(to_string(m)) + " was not run");
}

std::vector<double> ExperimentResult::thetas(Method m) const {
  std::vector<double> out;
  for (const auto& row : raw)
    if (row.method == m && row.ok) out.push_back(row.theta_hat);
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig& config, unsigned threads, const ProgressCallback& progress) {
  config.validate();
  const std::size_t R = config.realizations;
  const std::size_t M = config.methods.size();

  std::vector<std::vector<RawRow>> rows(R);
  std::vector<std::vector<double>> seconds(R, std::vector<double>(M, 0.0));
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};
  std::mutex progress_mutex;

  auto worker = [&] {
    for (std::size_t r = next++; r < R; r = next++) {
      const DataRecord data = generate_realization(config, r);
      for (std::size_t k = 0; k < M; ++k) {
        const Method method = config.methods[k];
        if (!runs_method(config, method, r)) continue;
        RawRow row;
        row.realization = r;
        row.method = method;
        const auto start = std::chrono::steady_clock::now();
        try {
          const EstimateReport rep = run_method(config, method, data, r);
          row.theta_hat = rep.theta_hat;
          row.predicted_std = rep.predicted_std;
          if (rep.degenerate) {
            row.ok = false;
            row.diagnostic = "flat criterion";
          }
        } catch (const Error& ex) {
          row.ok = false;
          row.theta_hat = std::nan("");
          row.predicted_std = std::nan("");
          row.diagnostic = ex.what();
        }
        seconds[r][k] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        rows[r].push_back(std::move(row));
      }
      const std::size_t finished = ++done;
      if (progress) {
        std::lock_guard lock(progress_mutex);
        progress(finished, R);
      }
    }
  };

  unsigned workers = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, R));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < workers; ++i) pool.emplace_back(worker);
  }

  ExperimentResult result;
  result.config = config;
  for (std::size_t r = 0; r < R; ++r) {
    result.ledger.push_back(ledger_entry(config, r));
    for (auto& row : rows[r]) result.raw.push_back(std::move(row));
  }
  for (std::size_t k = 0; k < M; ++k) {
    MethodSummary s;
    s.method = config.methods[k];
    std::vector<double> ok, predicted;
    for (const auto& row : result.raw) {
      if (row.method != s.method) continue;
      if (row.ok) {
        ok.push_back(row.theta_hat);
        if (std::isfinite(row.predicted_std)) predicted.push_back(row.predicted_std);
      } else {
        ++s.failures;
      }
    }
    for (std::size_t r = 0; r < R; ++r) s.wall_time_s += seconds[r][k];
    s.runs = ok.size();
    std::tie(s.mean, s.std) = mean_std(ok);
    s.mean_predicted_std = predicted.empty() ? std::nan("") : mean_std(predicted).first;
    result.summaries.push_back(s);
  }
  return result;
}

double linear_baseline_std(const ExperimentConfig& config) {
  if (!(config.sigma_u2 > 0.0) || config.N == 0) throw InvalidArgument("baseline needs sigma_u2 > 0 and N > 0");
  return std::sqrt((config.sigma_v2 + config.sigma_e2) / (config.sigma_u2 * static_cast<double>(config.N)));
}

namespace {

void open_out(std::ofstream& os, const std::filesystem::path& p) {
  os.open(p);
  if (!os) throw Error("cannot open '" + p.string() + "' for writing");
}

void close_out(std::ofstream& os, const std::filesystem::path& p) {
  os.close();
  if (!os) throw Error("failed writing '" + p.string() + "'");
}

nlohmann::json config_json(const ExperimentConfig& c) {
  std::vector<std::string> methods;
  for (Method m : c.methods) methods.emplace_back(to_string(m));
  return {{"theta_o", c.theta_o},
          {"sigma_v2", c.sigma_v2},
          {"sigma_e2", c.sigma_e2},
          {"sigma_u2", c.sigma_u2},
          {"input_kind", std::string(to_string(c.input_kind))},
          {"N", c.N},
          {"realizations", c.realizations},
          {"methods", methods},
          {"master_seed", c.master_seed.value},
          {"ml_quad_order", c.ml_quad_order},
          {"ml_adaptive", c.ml_adaptive},
          {"S", c.S},
          {"desk_scale", c.desk_scale}};
}

nlohmann::json number_or_null(double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); }

double number_from(const nlohmann::json& j) { return j.is_null() ? std::nan("") : j.get<double>(); }

}  // namespace

ReportFiles emit_report(const ExperimentResult& result, ReportFormat format, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory '" + dir.string() + "': " + ec.message());

  ReportFiles files;
  std::ofstream os;
  if (format == ReportFormat::CSV) {
    files = {dir / "summary.csv", dir / "raw.csv", dir / "ledger.cfg", dir / "seeds.csv"};
    open_out(os, files.summary);
    os << "method,runs,failures,mean,std,mean_predicted_std,wall_time_s\n";
    for (const auto& s : result.summaries)
      os << to_string(s.method) << ',' << s.runs << ',' << s.failures << ',' << detail::format_double(s.mean) << ','
         << detail::format_double(s.std) << ',' << detail::format_double(s.mean_predicted_std) << ','
         << detail::format_double(s.wall_time_s) << '\n';
    close_out(os, files.summary);

    open_out(os, files.raw);
    os << "realization,method,ok,theta_hat,predicted_std,diagnostic\n";
    for (const auto& row : result.raw) {
      std::string diag = row.diagnostic;
      std::replace(diag.begin(), diag.end(), ',', ';');
      std::replace(diag.begin(), diag.end(), '\n', ' ');
      os << row.realization << ',' << to_string(row.method) << ',' << (row.ok ? 1 : 0) << ','
         << detail::format_double(row.theta_hat) << ',' << detail::format_double(row.predicted_std) << ',' << diag
         << '\n';
    }
    close_out(os, files.raw);

    open_out(os, files.ledger);
    write_config(os, result.config);
    close_out(os, files.ledger);

    open_out(os, files.seeds);
    os << "realization,input,process_noise,measurement_noise,simulation,simulation_input\n";
    for (const auto& e : result.ledger)
      os << e.realization << ',' << e.input.value << ',' << e.process_noise.value << ','
         << e.measurement_noise.value << ',' << e.simulation.value << ','
         << e.simulation_input.value << '\n';
    close_out(os, files.seeds);
    return files;
  }

  files = {dir / "summary.json", dir / "raw.json", dir / "ledger.json", {}};
  nlohmann::json summary = nlohmann::json::array();
  for (const auto& s : result.summaries)
    summary.push_back({{"method", std::string(to_string(s.method))},
                       {"runs", s.runs},
                       {"failures", s.failures},
                       {"mean", number_or_null(s.mean)},
                       {"std", number_or_null(s.std)},
                       {"mean_predicted_std", number_or_null(s.mean_predicted_std)},
                       {"wall_time_s", s.wall_time_s}});
  open_out(os, files.summary);
  os << summary.dump(2) << '\n';
  close_out(os, files.summary);

  nlohmann::json raw = nlohmann::json::array();
  for (const auto& row : result.raw)
    raw.push_back({{"realization", row.realization},
                   {"method", std::string(to_string(row.method))},
                   {"ok", row.ok},
                   {"theta_hat", number_or_null(row.theta_hat)},
                   {"predicted_std", number_or_null(row.predicted_std)},
                   {"diagnostic", row.diagnostic}});
  open_out(os, files.raw);
  os << raw.dump(2) << '\n';
  close_out(os, files.raw);

  nlohmann::json seeds = nlohmann::json::array();
  for (const auto& e : result.ledger)
    seeds.push_back({{"realization", e.realization},
                     {"input", e.input.value},
                     {"process_noise", e.process_noise.value},
                     {"measurement_noise", e.measurement_noise.value},
                     {"simulation", e.simulation.value},
                     {"simulation_input", e.simulation_input.value}});
  open_out(os, files.ledger);
  os << nlohmann::json{{"config", config_json(result.config)}, {"seeds", seeds}}.dump(2) << '\n';
  close_out(os, files.ledger);
  return files;
}

std::vector<RawRow> read_raw(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open '" + path.string() + "'");
  std::vector<RawRow> rows;
  if (path.extension() == ".json") {
    const nlohmann::json raw = nlohmann::json::parse(is);
    for (const auto& j : raw) {
      RawRow row;
      row.realization = j.at("realization").get<std::size_t>();
      row.method = parse_method(j.at("method").get<std::string>());
      row.ok = j.at("ok").get<bool>();
      row.theta_hat = number_from(j.at("theta_hat"));
      row.predicted_std = number_from(j.at("predicted_std"));
      row.diagnostic = j.at("diagnostic").get<std::string>();
      rows.push_back(std::move(row));
    }
    return rows;
  }

  std::string line;
  if (!std::getline(is, line) || detail::trim(line) != "realization,method,ok,theta_hat,predicted_std,diagnostic")
    throw InvalidArgument("read_raw: unexpected header in '" + path.string() + "'");
  while (std::getline(is, line)) {
    if (detail::trim(line).empty()) continue;
    std::vector<std::string_view> fields;
    std::string_view sv(line);
    for (int i = 0; i < 5; ++i) {
      const auto comma = sv.find(',');
      if (comma == std::string_view::npos) throw InvalidArgument("read_raw: short row '" + line + "'");
      fields.push_back(sv.substr(0, comma));
      sv.remove_prefix(comma + 1);
    }
    RawRow row;
    row.realization = detail::parse_integer<std::size_t>(fields[0], "realization");
    row.method = parse_method(detail::trim(fields[1]));
    row.ok = detail::trim(fields[2]) == "1";
    row.theta_hat = detail::parse_double(fields[3], "theta_hat");
    row.predicted_std = detail::parse_double(fields[4], "predicted_std");
    row.diagnostic = std::string(detail::trim(sv));
    rows.push_back(std::move(row));
  }
  return rows;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open config '" + path + "'");
  if (std::filesystem::path(path).extension() != ".json") return parse_config(is);

  // A JSON ledger (or bare config object): rewrite it as key = value text so
  // that both formats go through the same parser and validation.
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument("config '" + path + "': " + e.what());
  }
  const nlohmann::json& c = j.contains("config") ? j.at("config") : j;
  if (!c.is_object()) throw InvalidArgument("config '" + path + "': expected an object");
  std::ostringstream text;
  for (const auto& [key, value] : c.items()) {
    text << key << " = ";
    if (value.is_string()) {
      text << value.get<std::string>();
    } else if (value.is_array()) {
      for (std::size_t i = 0; i < value.size(); ++i) text << (i ? "," : "") << value[i].get<std::string>();
    } else if (value.is_number_float()) {
      text << detail::format_double(value.get<double>());
    } else {
      text << value.dump();
    }
    text << '\n';
  }
  std::istringstream in(text.str());
  return parse_config(in);
}

}  // namespace wiener
