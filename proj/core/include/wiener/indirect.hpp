#pragma once

#include <Eigen/Dense>
#include <memory>
#include <vector>

#include "wiener/bla.hpp"
#include "wiener/estimate.hpp"
#include "wiener/numerics.hpp"
#include "wiener/signals.hpp"
#include "wiener/system.hpp"

namespace wiener {

/// First-order BLA binding function of the cubic FIR example, gaussian input:
/// beta(theta) = [3 su2 theta^2 + 3 (su2 + sv2)] (theta, 1).
Eigen::Vector2d beta_map_gaussian(double theta, double sigma_u2, double sigma_v2);
Eigen::Vector2d beta_map_gaussian_derivative(double theta, double sigma_u2, double sigma_v2);

/// Same for uniform input: beta_1 = (9/5) su2 theta^3 + 3 (su2 + sv2) theta,
/// beta_2 = 3 su2 theta^2 + 3 ((3/5) su2 + sv2).
Eigen::Vector2d beta_map_uniform(double theta, double sigma_u2, double sigma_v2);
Eigen::Vector2d beta_map_uniform_derivative(double theta, double sigma_u2, double sigma_v2);

/// beta_hat_{N,S}(theta): least-squares BLA fitted to S stacked noise-free-output
/// simulations f(G(q, theta) u_s + v_s). The v_s streams are drawn once from
/// `seed` and reused for every theta (common random numbers). Either one input
/// is shared by all S simulations or each simulation gets its own input.
class SimulatedBetaMap {
 public:
  SimulatedBetaMap(std::vector<double> u, std::size_t history, const SystemSpec& spec_template, std::size_t S,
                   Seed seed, std::vector<int> lags);
  /// One input per simulation; S = inputs.size().
  SimulatedBetaMap(const std::vector<std::vector<double>>& inputs, std::size_t history,
                   const SystemSpec& spec_template, Seed seed, std::vector<int> lags);

  Eigen::VectorXd operator()(double theta) const;
  std::size_t S() const { return noise_.size(); }
  const std::vector<int>& lags() const { return lags_; }

 private:
  void init(std::size_t S, Seed seed);

  SystemSpec spec_;
  std::vector<int> lags_;
  std::vector<LinearSplit> splits_;  // one shared, or one per simulation
  std::vector<std::vector<double>> noise_;
  Eigen::HouseholderQR<Eigen::MatrixXd> qr_;
};

Eigen::VectorXd beta_map_simulated(double theta, const std::vector<double>& u, std::size_t history,
                                   const SystemSpec& spec_template, std::size_t S, Seed seed,
                                   const std::vector<int>& lags);

enum class BetaMapKind { AnalyticGaussian, AnalyticUniform, Simulated };

/// Binding function theta -> beta used by Step 2.
class BetaMap {
 public:
  static BetaMap analytic_gaussian(double sigma_u2, double sigma_v2);
  static BetaMap analytic_uniform(double sigma_u2, double sigma_v2);
  static BetaMap simulated(std::shared_ptr<const SimulatedBetaMap> sim);

  BetaMapKind kind() const { return kind_; }
  std::size_t m() const;
  std::size_t n() const { return 1; }
  Eigen::VectorXd operator()(double theta) const;
  /// dbeta/dtheta; analytic for the closed-form maps, central differences otherwise.
  Eigen::MatrixXd jacobian(double theta) const;
  /// 1 for analytic maps, 1 + 1/S for the simulated map.
  double inflation() const;

 private:
  BetaMap(BetaMapKind kind, double su2, double sv2, std::shared_ptr<const SimulatedBetaMap> sim)
      : kind_(kind), sigma_u2_(su2), sigma_v2_(sv2), sim_(std::move(sim)) {}

  BetaMapKind kind_;
  double sigma_u2_ = 0.0;
  double sigma_v2_ = 0.0;
  std::shared_ptr<const SimulatedBetaMap> sim_;
};

enum class Weighting { Identity, Sandwich };

struct IndirectReport {
  double theta_hat = 0.0;
  Eigen::MatrixXd G;              // m x 1 Jacobian of beta at theta_hat
  Eigen::MatrixXd predicted_cov;  // 1 x 1 predicted Cov(theta_hat)
  double inflation = 1.0;
  Weighting weighting_used = Weighting::Identity;
  double min_value = 0.0;
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
  bool degenerate = false;
};

/// Step 2: theta_hat = argmin [beta(theta) - beta_hat]^T W [beta(theta) - beta_hat].
///
/// predicted_cov = inflation * (G^T W G)^-1 G^T W C W G (G^T W G)^-1 with
/// C = bla.cov_beta when available; for the sandwich W = C^-1 / N this is
/// inflation * [G^T W G]^-1 / N. Without C, [G^T W G]^-1 / N is reported.
/// Throws InvalidArgument when W is not symmetric positive definite.
IndirectReport step2(const BlaEstimate& bla, const Eigen::MatrixXd& W, Weighting weighting, const BetaMap& map,
                     const OptimizerSettings& settings = {});

/// Zero-order route: regress y(t) on u(t) alone and invert the monotone
/// beta_1(theta) of the matching analytic map.
EstimateReport zero_order_estimate(const DataRecord& data, const SystemSpec& spec_template);

/// Unique real root of the strictly increasing beta_1(theta) = target.
double invert_beta1(double target, DistributionKind input, double sigma_u2, double sigma_v2);

/// First-order route: BLA on lags {0, 1}, then Step 2 with the analytic map
/// for the template's input distribution.
IndirectReport first_order_estimate(const DataRecord& data, const SystemSpec& spec_template, bool weighted,
                                    const OptimizerSettings& settings = {});

/// First-order route with the simulated map (S realizations over one shared `sim_input`).
IndirectReport first_order_simulated_estimate(const DataRecord& data, const SystemSpec& spec_template,
                                              std::vector<double> sim_input, std::size_t S, Seed seed,
                                              const OptimizerSettings& settings = {});
/// Same with one simulation per entry of `sim_inputs`.
IndirectReport first_order_simulated_estimate(const DataRecord& data, const SystemSpec& spec_template,
                                              const std::vector<std::vector<double>>& sim_inputs, Seed seed,
                                              const OptimizerSettings& settings = {});

EstimateReport to_estimate_report(const IndirectReport& r, Method method);

}  // namespace wiener
