#include "wiener/ml.hpp"

#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <limits>
#include <numbers>

#include "text.hpp"
#include "wiener/error.hpp"

namespace wiener {
namespace {

std::string where(std::size_t t, double theta) {
  return " at t = " + std::to_string(t) + ", theta = " + detail::format_double(theta);
}

}  // namespace

LikelihoodEvaluator::LikelihoodEvaluator(const DataRecord& data, const SystemSpec& spec_template,
                                         const MlSettings& settings)
    : LikelihoodEvaluator(data, spec_template, settings,
                          std::make_shared<const QuadratureRule>(gauss_hermite(settings.quad_order))) {}

LikelihoodEvaluator::LikelihoodEvaluator(const DataRecord& data, const SystemSpec& spec_template,
                                         const MlSettings& settings, std::shared_ptr<const QuadratureRule> rule)
    : data_(&data), spec_(spec_template), settings_(settings), rule_(std::move(rule)) {
  spec_.validate();
  data.validate();
  if (spec_.fir.num_free() != 1) throw InvalidArgument("ML: only a single free FIR coefficient is supported");
  if (!(spec_.sigma_e2 > 0.0)) throw InvalidArgument("ML: sigma_e2 must be positive");
  if (!rule_ || rule_->order < 1) throw InvalidArgument("ML: missing quadrature rule");
  split_ = split_linear(spec_.fir, data.u, data.history);
  if (settings_.adaptive) {
    preimages_.reserve(data.N());
    for (double y : data.y) preimages_.push_back(spec_.nonlinearity.preimage(y));
  }
}

double LikelihoodEvaluator::plain_log_term(double a, double y, std::size_t index, double theta) const {
  const std::size_t k = rule_->order;
  const double inv2se2 = 0.5 / spec_.sigma_e2;
  const double scale = std::sqrt(2.0 * spec_.sigma_v2);
  const Nonlinearity& f = spec_.nonlinearity;
  const double log_norm = 0.5 * std::log(std::numbers::pi);

  if (!settings_.log_space) {
    double acc = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      const double r = y - f.value(a + scale * rule_->nodes[i]);
      acc += rule_->weights[i] * std::exp(-r * r * inv2se2);
    }
    if (!(acc > 0.0)) throw NumericError("ML: every quadrature term underflowed" + where(index + 1, theta));
    return std::log(acc) - log_norm;
  }

  thread_local std::vector<double> exponents;
  exponents.resize(k);
  double peak = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < k; ++i) {
    const double r = y - f.value(a + scale * rule_->nodes[i]);
    exponents[i] = rule_->log_weights[i] - r * r * inv2se2;
    peak = std::max(peak, exponents[i]);
  }
  if (!std::isfinite(peak)) throw NumericError("ML: quadrature sum is not finite" + where(index + 1, theta));
  double acc = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double d = exponents[i] - peak;
    if (d > -60.0) acc += std::exp(d);
  }
  return peak + std::log(acc) - log_norm;
}

// Works in z = a + sigma_v V with log-integrand
//   L(z) = -(z - a)^2 / (2 sv2) - (y - f(z))^2 / (2 se2).
// The rule is placed at the mode z* with scale s = (-L''(z*))^{-1/2}:
//   E_V{...} = s / (sigma_v sqrt(pi)) sum_i w_i exp(x_i^2 + L(z* + sqrt(2) s x_i)).
double LikelihoodEvaluator::adaptive_log_term(double a, double y, std::size_t index, double theta) const {
  const double sv2 = spec_.sigma_v2;
  const double se2 = spec_.sigma_e2;
  const Nonlinearity& f = spec_.nonlinearity;
  if (sv2 == 0.0) {
    const double r = y - f.value(a);
    return -r * r / (2.0 * se2);
  }
  const double sigma_v = std::sqrt(sv2);
  auto log_integrand = [&](double z) {
    const double r = y - f.value(z);
    return -(z - a) * (z - a) / (2.0 * sv2) - r * r / (2.0 * se2);
  };

  // The posterior mode lies between the prior mode a and a preimage of y.
  double mode = a;
  double best = log_integrand(a);
  for (double root : preimages_[index]) {
    if (root == a) continue;
    const double lo = std::min(a, root), hi = std::max(a, root);
    std::uintmax_t iters = 100;
    const auto [z, neg] = boost::math::tools::brent_find_minima([&](double x) { return -log_integrand(x); }, lo, hi,
                                                                20, iters);
    if (-neg > best) {
      best = -neg;
      mode = z;
    }
    const double at_root = log_integrand(root);
    if (at_root > best) {
      best = at_root;
      mode = root;
    }
  }

  const double fp = f.derivative(mode);
  const double curvature = 1.0 / sv2 + (fp * fp - (y - f.value(mode)) * f.second_derivative(mode)) / se2;
  const double s = curvature > 0.0 ? std::min(1.0 / std::sqrt(curvature), sigma_v) : sigma_v;
  const double step = std::numbers::sqrt2 * s;
  const double log_prefactor = std::log(s / sigma_v) - 0.5 * std::log(std::numbers::pi);

  const std::size_t k = rule_->order;
  if (!settings_.log_space) {
    double acc = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      const double x = rule_->nodes[i];
      acc += std::exp(rule_->log_weights[i] + x * x + log_integrand(mode + step * x));
    }
    if (!(acc > 0.0)) throw NumericError("ML: every quadrature term underflowed" + where(index + 1, theta));
    return std::log(acc) + log_prefactor;
  }

  thread_local std::vector<double> exponents;
  exponents.resize(k);
  double peak = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < k; ++i) {
    const double x = rule_->nodes[i];
    exponents[i] = rule_->log_weights[i] + x * x + log_integrand(mode + step * x);
    peak = std::max(peak, exponents[i]);
  }
  if (!std::isfinite(peak)) throw NumericError("ML: quadrature sum is not finite" + where(index + 1, theta));
  double acc = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double d = exponents[i] - peak;
    if (d > -60.0) acc += std::exp(d);
  }
  return peak + std::log(acc) + log_prefactor;
}

double LikelihoodEvaluator::log_term_at(double a, std::size_t index, double theta) const {
  const double y = data_->y[index];
  return settings_.adaptive ? adaptive_log_term(a, y, index, theta) : plain_log_term(a, y, index, theta);
}

double LikelihoodEvaluator::log_term(double theta, std::size_t t) const {
  if (t < 1 || t > data_->N()) throw InvalidArgument("ML: sample index out of range");
  const auto i = static_cast<Eigen::Index>(t - 1);
  return log_term_at(split_.fixed[i] + theta * split_.free(i, 0), t - 1, theta);
}

double LikelihoodEvaluator::operator()(double theta) const {
  double acc = 0.0;
  for (std::size_t t = 0; t < data_->N(); ++t) {
    const auto i = static_cast<Eigen::Index>(t);
    acc -= log_term_at(split_.fixed[i] + theta * split_.free(i, 0), t, theta);
  }
  return acc;
}

double neg_log_likelihood(double theta, const DataRecord& data, const SystemSpec& spec_template,
                          const MlSettings& settings) {
  return LikelihoodEvaluator(data, spec_template, settings)(theta);
}

EstimateReport ml_estimate(const LikelihoodEvaluator& likelihood, const OptimizerSettings& optimizer) {
  const ScalarMinimum best = minimize_scalar([&](double theta) { return likelihood(theta); }, optimizer);
  EstimateReport report;
  report.method = Method::ML;
  report.theta_hat = best.argmin;
  report.cost = best.min_value;
  report.iterations = best.iterations;
  report.evaluations = best.evaluations;
  report.degenerate = best.degenerate;
  return report;
}

EstimateReport ml_estimate(const DataRecord& data, const SystemSpec& spec_template, const MlSettings& settings) {
  return ml_estimate(LikelihoodEvaluator(data, spec_template, settings), settings.optimizer);
}

}  // namespace wiener
