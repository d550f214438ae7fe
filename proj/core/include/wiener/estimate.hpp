#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <string_view>

namespace wiener {

/// Estimators compared by the experiment harness.
///   ML       maximum likelihood (Gauss-Hermite marginal likelihood)
///   PEM      conditional-mean PEM without weighting
///   PEM_W    conditional-mean PEM with frozen variance weighting
///   II0      zero-order indirect inference
///   II1_UNW  first-order indirect inference, identity weighting
///   II1_W    first-order indirect inference, sandwich weighting
///   II1_SIM  first-order indirect inference, sandwich weighting, simulated map
enum class Method { ML, PEM, PEM_W, II0, II1_UNW, II1_W, II1_SIM };

std::string_view to_string(Method m);
/// Throws InvalidArgument for an unknown tag.
Method parse_method(std::string_view tag);

/// Outcome of one estimator on one data record.
struct EstimateReport {
  Method method = Method::ML;
  double theta_hat = 0.0;
  /// Final criterion value at theta_hat (up to each method's additive constant).
  double cost = 0.0;
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
  bool degenerate = false;
  /// Predicted asymptotic standard deviation of theta_hat, NaN when the method
  /// has no covariance predictor.
  double predicted_std = std::nan("");
  std::string notes;
};

}  // namespace wiener
