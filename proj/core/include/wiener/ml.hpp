#pragma once

#include <memory>
#include <vector>

#include "wiener/estimate.hpp"
#include "wiener/numerics.hpp"
#include "wiener/system.hpp"

namespace wiener {

struct MlSettings {
  std::size_t quad_order = 1000;
  OptimizerSettings optimizer;
  /// Accumulate each quadrature sum as a max-shifted exponential sum.
  bool log_space = true;
  /// Recentre and rescale the Gauss-Hermite rule at each term's posterior
  /// mode (Laplace scale). With false the rule is centred on the prior
  /// a(t, theta) with scale sigma_v, which needs far more nodes to resolve
  /// the sharp peak that f puts in the integrand.
  bool adaptive = true;
};

/// Negative log-likelihood of a single free FIR coefficient with the process
/// noise integrated out by Gauss-Hermite quadrature:
///
///   l(theta) = -sum_t log E_V{ exp(-[y(t) - f(a(t, theta) + sigma_v V)]^2 / (2 sigma_e2)) },  V ~ N(0, 1)
///
/// Theta-independent normalization constants are dropped, so values are
/// defined up to an additive constant. The rule and the data split are built
/// once and reused for every theta; terms are summed in time order.
class LikelihoodEvaluator {
 public:
  LikelihoodEvaluator(const DataRecord& data, const SystemSpec& spec_template, const MlSettings& settings);
  LikelihoodEvaluator(const DataRecord& data, const SystemSpec& spec_template, const MlSettings& settings,
                      std::shared_ptr<const QuadratureRule> rule);

  double operator()(double theta) const;

  /// log E_V{...} for the single sample t (1-based).
  double log_term(double theta, std::size_t t) const;

  const QuadratureRule& rule() const { return *rule_; }

 private:
  double log_term_at(double a, std::size_t index, double theta) const;
  double plain_log_term(double a, double y, std::size_t index, double theta) const;
  double adaptive_log_term(double a, double y, std::size_t index, double theta) const;

  const DataRecord* data_;
  SystemSpec spec_;
  MlSettings settings_;
  std::shared_ptr<const QuadratureRule> rule_;
  LinearSplit split_;
  std::vector<std::vector<double>> preimages_;  // f^-1(y(t))
};

double neg_log_likelihood(double theta, const DataRecord& data, const SystemSpec& spec_template,
                          const MlSettings& settings = {});

/// argmin of l(theta) over the optimizer bracket.
EstimateReport ml_estimate(const DataRecord& data, const SystemSpec& spec_template, const MlSettings& settings = {});
EstimateReport ml_estimate(const LikelihoodEvaluator& likelihood, const OptimizerSettings& optimizer);

}  // namespace wiener
