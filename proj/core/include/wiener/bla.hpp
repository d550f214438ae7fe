#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <vector>

#include "wiener/system.hpp"

namespace wiener {

/// Best linear approximation y(t) ~ sum_k beta_k u(t - lags[k]) fitted by
/// least squares, optionally with its sandwich covariance and weighting.
struct BlaEstimate {
  std::vector<int> lags;
  Eigen::VectorXd beta_hat;
  Eigen::VectorXd residuals;
  std::size_t N = 0;

  // Filled by estimate_weighting.
  bool has_weighting = false;
  Eigen::MatrixXd I_hat;     // (1/N) sum eps^2 phi phi^T
  Eigen::MatrixXd J_hat;     // (2/N) sum phi phi^T, the Hessian of Q_N
  Eigen::MatrixXd cov_beta;  // (1/N) J^-1 (4 I) J^-1, approximates Cov(beta_hat)
  Eigen::MatrixXd W;         // inverse of Cov(sqrt(N) beta_hat), i.e. cov_beta^-1 / N
  bool ridge_applied = false;

  std::size_t order() const { return static_cast<std::size_t>(beta_hat.size()); }
};

/// Regressor matrix with rows (u(t - lags[0]), ..., u(t - lags[m-1])), t = 1..N.
Eigen::MatrixXd bla_regressors(const DataRecord& data, const std::vector<int>& lags);

/// Step 1: argmin of Q_N(beta) = (1/N) sum (y(t) - sum_k beta_k u(t - lag_k))^2.
BlaEstimate fit_bla(const DataRecord& data, const std::vector<int>& lags);

/// Fills I_hat, J_hat, cov_beta and W from the BLA residuals. When I_hat has
/// condition number above 1e12 a ridge of 1e-10 * trace / m is added first
/// and ridge_applied is set. Throws NumericError when the residuals vanish
/// (to rounding) or J_hat is singular.
BlaEstimate estimate_weighting(const DataRecord& data, BlaEstimate est);

struct BussgangGain {
  double b0 = 0.0;
  /// False when the input is not gaussian; b0 is then only a heuristic.
  bool gaussian = true;
};

/// b0 = E{f'(z)} with z ~ N(0, ||G||^2 sigma_u^2 + sigma_v^2).
BussgangGain bussgang_gain(const SystemSpec& spec);

/// Plain-text report: one `key: value` line per scalar, matrices row-major.
void write_report(std::ostream& os, const BlaEstimate& est);

}  // namespace wiener
