#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "wiener/signals.hpp"

namespace wiener {

/// A known FIR coefficient at a fixed lag.
struct FirTap {
  int lag = 0;
  double value = 0.0;
};

/// FIR structure G(q, theta) = sum_i theta_i q^{-free_lags[i]} + sum_j c_j q^{-fixed[j].lag}.
struct FirStructure {
  std::vector<int> free_lags;
  std::vector<FirTap> fixed;

  /// theta * u(t) + u(t-1): the cubic example's linear block.
  static FirStructure first_order_example();

  int max_lag() const;
  std::size_t num_free() const { return free_lags.size(); }
  /// Throws InvalidArgument on negative or repeated lags or no free coefficient.
  void validate() const;
};

enum class NonlinearityKind { Cubic, Identity, Polynomial };

/// Static polynomial output map f(x) = sum_k c_k x^k with its derivative.
class Nonlinearity {
 public:
  static Nonlinearity cubic();
  static Nonlinearity identity();
  /// Coefficients in increasing power order; trailing zeros are trimmed.
  static Nonlinearity polynomial(std::vector<double> coefficients);

  NonlinearityKind kind() const { return kind_; }
  const std::vector<double>& coefficients() const { return coeffs_; }

  double value(double x) const;
  double derivative(double x) const;
  double second_derivative(double x) const;
  /// Real solutions z of f(z) = y, ascending (closed form for cubic and identity).
  std::vector<double> preimage(double y) const;

 private:
  Nonlinearity(NonlinearityKind kind, std::vector<double> coeffs)
      : kind_(kind), coeffs_(std::move(coeffs)) {}

  NonlinearityKind kind_;
  std::vector<double> coeffs_;
};

struct SystemSpec {
  FirStructure fir = FirStructure::first_order_example();
  Eigen::VectorXd theta = Eigen::VectorXd::Constant(1, 0.5);
  Nonlinearity nonlinearity = Nonlinearity::cubic();
  double sigma_v2 = 0.2;
  double sigma_e2 = 0.1;
  Distribution input_dist = Distribution::gaussian(1.0 / 3.0);

  void validate() const;
};

/// One experiment: inputs u(1-history .. N) and outputs y(1 .. N).
struct DataRecord {
  std::vector<double> u;
  std::vector<double> y;
  std::size_t history = 1;

  std::size_t N() const { return y.size(); }
  /// Input sample at time t, valid for 1 - history <= t <= N.
  double u_at(long t) const { return u[static_cast<std::size_t>(t - 1 + static_cast<long>(history))]; }
  void validate() const;
};

/// G(q, theta) u(t) for t = 1..N where N = u.size() - history.
std::vector<double> linear_output(const FirStructure& fir, const Eigen::VectorXd& theta,
                                  std::span<const double> u, std::size_t history);

/// Noise-free linear output split into the theta-free part and one column per
/// free coefficient, so that G(q, theta) u = fixed + free * theta.
struct LinearSplit {
  Eigen::VectorXd fixed;
  Eigen::MatrixXd free;
};

LinearSplit split_linear(const FirStructure& fir, std::span<const double> u, std::size_t history);

struct Simulation {
  std::vector<double> z;
  std::vector<double> y;
};

/// z(t) = G(q, theta) u(t) + v(t), y(t) = f(z(t)) + e(t), t = 1..N.
/// v and e must have length N = u.size() - history.
Simulation simulate(const SystemSpec& spec, std::span<const double> u, std::span<const double> v,
                    std::span<const double> e, std::size_t history);

/// CSV with header `t,u,y`, one row per t = 1-history .. N; y is empty for t <= 0.
/// Values are written with 17 significant digits so read_csv reproduces them exactly.
void write_csv(std::ostream& os, const DataRecord& data);
void write_csv(const std::string& path, const DataRecord& data);
DataRecord read_csv(std::istream& is);
DataRecord read_csv(const std::string& path);

}  // namespace wiener
