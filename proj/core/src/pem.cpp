#include "wiener/pem.hpp"

#include <cmath>
#include <vector>

#include "wiener/error.hpp"

namespace wiener {

PredictorMoments predictor_moments(const Nonlinearity& f, double a, double sigma_v2, double sigma_e2) {
  switch (f.kind()) {
    case NonlinearityKind::Cubic: {
      const double a2 = a * a;
      const double s = sigma_v2;
      return {a * (a2 + 3.0 * s), 9.0 * s * a2 * a2 + 36.0 * s * s * a2 + 15.0 * s * s * s + sigma_e2};
    }
    case NonlinearityKind::Identity:
      return {a, sigma_v2 + sigma_e2};
    case NonlinearityKind::Polynomial:
      break;
  }
  static const QuadratureRule rule = gauss_hermite(50);
  const double sv = std::sqrt(sigma_v2);
  const double mean = rule.expect_standard_normal([&](double x) { return f.value(a + sv * x); });
  const double second = rule.expect_standard_normal([&](double x) {
    const double d = f.value(a + sv * x) - mean;
    return d * d;
  });
  return {mean, second + sigma_e2};
}

double predict(double theta, double u_t, double u_tm1, double sigma_v2) {
  return predictor_moments(Nonlinearity::cubic(), theta * u_t + u_tm1, sigma_v2, 0.0).mean;
}

double prediction_variance(double theta, double u_t, double u_tm1, double sigma_v2, double sigma_e2) {
  return predictor_moments(Nonlinearity::cubic(), theta * u_t + u_tm1, sigma_v2, sigma_e2).variance;
}

EstimateReport pem_estimate(const DataRecord& data, const SystemSpec& spec_template, bool weighted,
                            const OptimizerSettings& settings) {
  spec_template.validate();
  data.validate();
  if (spec_template.fir.num_free() != 1)
    throw InvalidArgument("pem_estimate: only a single free FIR coefficient is supported");

  const LinearSplit split = split_linear(spec_template.fir, data.u, data.history);
  const Eigen::VectorXd& base = split.fixed;
  const Eigen::VectorXd reg = split.free.col(0);
  const std::size_t n = data.N();
  const Nonlinearity& f = spec_template.nonlinearity;
  const double sv2 = spec_template.sigma_v2;
  const double se2 = spec_template.sigma_e2;

  std::vector<double> inv_weight(n, 1.0);
  auto cost = [&](double theta) {
    double acc = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      const auto i = static_cast<Eigen::Index>(t);
      const double a = base[i] + theta * reg[i];
      const double eps = data.y[t] - predictor_moments(f, a, sv2, se2).mean;
      acc += eps * eps * inv_weight[t];
    }
    return acc / static_cast<double>(n);
  };

  const ScalarMinimum initial = minimize_scalar(cost, settings);
  EstimateReport report;
  report.method = weighted ? Method::PEM_W : Method::PEM;
  report.theta_hat = initial.argmin;
  report.cost = initial.min_value;
  report.iterations = initial.iterations;
  report.evaluations = initial.evaluations;
  report.degenerate = initial.degenerate;
  if (!weighted) return report;

  // noise-free model: every prediction variance is zero, weights are uniform
  const bool noise_free = sv2 == 0.0 && se2 == 0.0;
  for (std::size_t t = 0; t < n && !noise_free; ++t) {
    const auto i = static_cast<Eigen::Index>(t);
    const double a = base[i] + initial.argmin * reg[i];
    const double w = predictor_moments(f, a, sv2, se2).variance;
    if (!(w > 0.0))
      throw NumericError("pem_estimate: non-positive prediction variance at t = " + std::to_string(t + 1) +
                         "");
    inv_weight[t] = 1.0 / w;
  }
  const ScalarMinimum refined = minimize_scalar(cost, settings);
  report.theta_hat = refined.argmin;
  report.cost = refined.min_value;
  report.iterations += refined.iterations;
  report.evaluations += refined.evaluations;
  report.degenerate = refined.degenerate;
  report.notes = "theta_I=" + std::to_string(initial.argmin);
  return report;
}

}  // namespace wiener
