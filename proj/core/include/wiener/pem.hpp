#pragma once

#include "wiener/estimate.hpp"
#include "wiener/numerics.hpp"
#include "wiener/system.hpp"

namespace wiener {

/// Conditional moments of y(t) = f(a + v) + e given the noise-free linear
/// output a, with v ~ N(0, sigma_v2) and e ~ N(0, sigma_e2).
struct PredictorMoments {
  double mean = 0.0;      // conditional-mean prediction
  double variance = 0.0;  // E{eps^2} of the prediction error, always >= sigma_e2
};

/// Closed forms for cubic and identity f; Gauss-Hermite (order 50) otherwise.
PredictorMoments predictor_moments(const Nonlinearity& f, double a, double sigma_v2, double sigma_e2);

/// Cubic example: E{(theta u_t + u_tm1 + v)^3} = a^3 + 3 a sigma_v2.
double predict(double theta, double u_t, double u_tm1, double sigma_v2);

/// Cubic example: 9 sigma_v2 a^4 + 36 sigma_v2^2 a^2 + 15 sigma_v2^3 + sigma_e2.
double prediction_variance(double theta, double u_t, double u_tm1, double sigma_v2, double sigma_e2);

/// Conditional-mean PEM for a single free FIR coefficient. Unweighted:
/// argmin (1/N) sum eps^2. Weighted: start from the unweighted estimate,
/// freeze w(t) = E{eps^2(t, theta_I)} and minimize (1/N) sum eps^2 / w.
EstimateReport pem_estimate(const DataRecord& data, const SystemSpec& spec_template, bool weighted,
                            const OptimizerSettings& settings = {});

}  // namespace wiener
