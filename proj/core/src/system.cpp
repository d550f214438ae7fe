#include "wiener/system.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include "text.hpp"
#include "wiener/error.hpp"

namespace wiener {

FirStructure FirStructure::first_order_example() { return FirStructure{{0}, {FirTap{1, 1.0}}}; }

int FirStructure::max_lag() const {
  int lag = 0;
  for (int l : free_lags) lag = std::max(lag, l);
  for (const auto& tap : fixed) lag = std::max(lag, tap.lag);
  return lag;
}

void FirStructure::validate() const {
  if (free_lags.empty()) throw InvalidArgument("FIR structure needs at least one free coefficient");
  std::set<int> seen;
  auto check = [&](int lag) {
    if (lag < 0) throw InvalidArgument("FIR lag must be non-negative");
    if (!seen.insert(lag).second)
      throw InvalidArgument("FIR lag " + std::to_string(lag) + " appears more than once");
  };
  for (int l : free_lags) check(l);
  for (const auto& tap : fixed) check(tap.lag);
}

Nonlinearity Nonlinearity::cubic() { return Nonlinearity(NonlinearityKind::Cubic, {0.0, 0.0, 0.0, 1.0}); }

Nonlinearity Nonlinearity::identity() { return Nonlinearity(NonlinearityKind::Identity, {0.0, 1.0}); }

Nonlinearity Nonlinearity::polynomial(std::vector<double> coefficients) {
  while (!coefficients.empty() && coefficients.back() == 0.0) coefficients.pop_back();
  if (coefficients.empty()) coefficients.push_back(0.0);
  return Nonlinearity(NonlinearityKind::Polynomial, std::move(coefficients));
}

double Nonlinearity::value(double x) const {
  switch (kind_) {
    case NonlinearityKind::Cubic:
      return x * x * x;
    case NonlinearityKind::Identity:
      return x;
    case NonlinearityKind::Polynomial:
      break;
  }
  double acc = 0.0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * x + *it;
  return acc;
}

double Nonlinearity::derivative(double x) const {
  switch (kind_) {
    case NonlinearityKind::Cubic:
      return 3.0 * x * x;
    case NonlinearityKind::Identity:
      return 1.0;
    case NonlinearityKind::Polynomial:
      break;
  }
  double acc = 0.0;
  for (std::size_t k = coeffs_.size(); k-- > 1;) acc = acc * x + static_cast<double>(k) * coeffs_[k];
  return acc;
}

double Nonlinearity::second_derivative(double x) const {
  switch (kind_) {
    case NonlinearityKind::Cubic:
      return 6.0 * x;
    case NonlinearityKind::Identity:
      return 0.0;
    case NonlinearityKind::Polynomial:
      break;
  }
  double acc = 0.0;
  for (std::size_t k = coeffs_.size(); k-- > 2;) acc = acc * x + static_cast<double>(k * (k - 1)) * coeffs_[k];
  return acc;
}

std::vector<double> Nonlinearity::preimage(double y) const {
  switch (kind_) {
    case NonlinearityKind::Cubic:
      return {std::cbrt(y)};
    case NonlinearityKind::Identity:
      return {y};
    case NonlinearityKind::Polynomial:
      break;
  }
  const std::size_t degree = coeffs_.size() - 1;
  if (degree == 0) return {};
  if (degree == 1) return {(y - coeffs_[0]) / coeffs_[1]};
  // companion matrix of the monic polynomial f(z) - y
  const auto d = static_cast<Eigen::Index>(degree);
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(d, d);
  companion.block(1, 0, d - 1, d - 1).setIdentity();
  for (Eigen::Index k = 0; k < d; ++k) {
    const double c = k == 0 ? coeffs_[0] - y : coeffs_[static_cast<std::size_t>(k)];
    companion(k, d - 1) = -c / coeffs_[degree];
  }
  const Eigen::VectorXcd roots = companion.eigenvalues();
  std::vector<double> out;
  for (const auto& r : roots)
    if (std::abs(r.imag()) <= 1e-9 * std::max(1.0, std::abs(r))) out.push_back(r.real());
  std::sort(out.begin(), out.end());
  return out;
}

void SystemSpec::validate() const {
  fir.validate();
  if (static_cast<std::size_t>(theta.size()) != fir.num_free())
    throw InvalidArgument("theta dimension does not match the number of free FIR coefficients");
  if (!(sigma_v2 >= 0.0) || !(sigma_e2 >= 0.0) || !(input_dist.variance >= 0.0))
    throw InvalidArgument("variances must be non-negative");
}

void DataRecord::validate() const {
  if (y.empty()) throw InvalidArgument("data record has no output samples");
  if (u.size() != y.size() + history)
    throw InvalidArgument("data record needs u.size() == N + history (got " + std::to_string(u.size()) +
                          " inputs for N=" + std::to_string(y.size()) + ")");
}

LinearSplit split_linear(const FirStructure& fir, std::span<const double> u, std::size_t history) {
  fir.validate();
  if (static_cast<std::size_t>(fir.max_lag()) > history)
    throw InvalidArgument("FIR lag " + std::to_string(fir.max_lag()) + " exceeds the available input history " +
                          std::to_string(history));
  if (u.size() <= history) throw InvalidArgument("input sequence shorter than its history");
  const std::size_t n = u.size() - history;
  LinearSplit out{Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n)),
                  Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(fir.num_free()))};
  for (std::size_t t = 0; t < n; ++t) {
    const std::size_t now = t + history;
    double fixed = 0.0;
    for (const auto& tap : fir.fixed) fixed += tap.value * u[now - static_cast<std::size_t>(tap.lag)];
    out.fixed[static_cast<Eigen::Index>(t)] = fixed;
    for (std::size_t i = 0; i < fir.free_lags.size(); ++i)
      out.free(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(i)) =
          u[now - static_cast<std::size_t>(fir.free_lags[i])];
  }
  return out;
}

std::vector<double> linear_output(const FirStructure& fir, const Eigen::VectorXd& theta,
                                  std::span<const double> u, std::size_t history) {
  if (static_cast<std::size_t>(theta.size()) != fir.num_free())
    throw InvalidArgument("theta dimension does not match the number of free FIR coefficients");
  const LinearSplit split = split_linear(fir, u, history);
  const Eigen::VectorXd g = split.fixed + split.free * theta;
  return {g.data(), g.data() + g.size()};
}

Simulation simulate(const SystemSpec& spec, std::span<const double> u, std::span<const double> v,
                    std::span<const double> e, std::size_t history) {
  spec.validate();
  const std::vector<double> g = linear_output(spec.fir, spec.theta, u, history);
  if (v.size() != g.size() || e.size() != g.size())
    throw InvalidArgument("simulate: noise sequences must have length N = " + std::to_string(g.size()));
  Simulation out;
  out.z.resize(g.size());
  out.y.resize(g.size());
  for (std::size_t t = 0; t < g.size(); ++t) {
    out.z[t] = g[t] + v[t];
    out.y[t] = spec.nonlinearity.value(out.z[t]) + e[t];
  }
  return out;
}

void write_csv(std::ostream& os, const DataRecord& data) {
  data.validate();
  os << "t,u,y\n";
  const long first = 1 - static_cast<long>(data.history);
  for (long t = first; t <= static_cast<long>(data.N()); ++t) {
    os << t << ',' << detail::format_double(data.u_at(t)) << ',';
    if (t >= 1) os << detail::format_double(data.y[static_cast<std::size_t>(t - 1)]);
    os << '\n';
  }
  if (!os) throw Error("write_csv: stream failure");
}

void write_csv(const std::string& path, const DataRecord& data) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open '" + path + "' for writing");
  write_csv(os, data);
}

DataRecord read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || detail::trim(line) != "t,u,y")
    throw InvalidArgument("read_csv: expected header 't,u,y'");
  DataRecord data;
  data.history = 0;
  long expected_t = 0;
  bool first_row = true;
  std::size_t row = 1;
  while (std::getline(is, line)) {
    ++row;
    if (detail::trim(line).empty()) continue;
    const auto c1 = line.find(',');
    const auto c2 = c1 == std::string::npos ? std::string::npos : line.find(',', c1 + 1);
    if (c2 == std::string::npos) throw InvalidArgument("read_csv: row " + std::to_string(row) + " needs 3 fields");
    const std::string_view sv(line);
    const long t = detail::parse_integer<long>(sv.substr(0, c1), "t");
    if (first_row) {
      if (t > 0) throw InvalidArgument("read_csv: the first row must carry t <= 0 (input history)");
      data.history = static_cast<std::size_t>(1 - t);
      expected_t = t;
      first_row = false;
    }
    if (t != expected_t) throw InvalidArgument("read_csv: rows must have consecutive t (row " + std::to_string(row) + ")");
    ++expected_t;
    data.u.push_back(detail::parse_double(sv.substr(c1 + 1, c2 - c1 - 1), "u"));
    const auto yfield = detail::trim(sv.substr(c2 + 1));
    if (t <= 0) {
      if (!yfield.empty()) throw InvalidArgument("read_csv: y must be empty for t <= 0");
    } else {
      data.y.push_back(detail::parse_double(yfield, "y"));
    }
  }
  data.validate();
  return data;
}

DataRecord read_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open '" + path + "' for reading");
  return read_csv(is);
}

}  // namespace wiener
