#pragma once

#include <Eigen/Dense>
#include <functional>
#include <span>
#include <vector>

namespace wiener {

/// Physicists' Gauss-Hermite rule: int e^{-x^2} g(x) dx ~ sum_i w_i g(x_i).
struct QuadratureRule {
  std::size_t order = 0;
  std::vector<double> nodes;        // strictly increasing, symmetric about 0
  std::vector<double> weights;      // positive; may underflow to 0 in the far tails
  std::vector<double> log_weights;  // log(w_i), finite even where w_i underflows

  /// E{g(V)} for V ~ N(0, 1), i.e. (1/sqrt(pi)) sum_i w_i g(sqrt(2) x_i).
  double expect_standard_normal(const std::function<double(double)>& g) const;

  /// log E{exp(h(V))} for V ~ N(0, 1), accumulated as a max-shifted
  /// exponential sum so that no term underflows before the shift.
  double log_expect_exp_standard_normal(const std::function<double(double)>& h) const;
};

/// Golub-Welsch nodes (Jacobi matrix eigenvalues, Newton-polished) with
/// weights from the Christoffel sum of orthonormal Hermite polynomials.
/// Requires 1 <= order <= 2000.
QuadratureRule gauss_hermite(std::size_t order);

struct OptimizerSettings {
  double lo = -3.0;
  double hi = 3.0;
  double abs_tol = 1e-6;
  std::size_t max_iter = 200;
  std::size_t grid_points = 61;

  void validate() const;
};

struct ScalarMinimum {
  double argmin = 0.0;
  double min_value = 0.0;
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
  /// Cost was flat across the whole grid scan; argmin is the tie-broken grid point.
  bool degenerate = false;
};

/// Grid scan over [lo, hi] to bracket the global minimum (ties broken toward
/// the smallest |x|), then Brent refinement inside the bracketing cells.
/// Throws NumericError naming x when the cost is not finite.
ScalarMinimum minimize_scalar(const std::function<double(double)>& cost,
                              const OptimizerSettings& settings = {});

struct LeastSquaresFit {
  Eigen::VectorXd coefficients;
  Eigen::VectorXd residuals;
  Eigen::VectorXd singular_values;  // of the regressor matrix, descending
};

/// Minimizes ||targets - regressors * beta||^2 via Householder QR.
/// Throws NumericError with the smallest singular value on rank deficiency.
LeastSquaresFit least_squares(const Eigen::MatrixXd& regressors, const Eigen::VectorXd& targets);

using VectorMap = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// Central-difference Jacobian, O(step^2) accurate for smooth maps.
Eigen::MatrixXd jacobian_fd(const VectorMap& map, const Eigen::VectorXd& point, double step = 1e-5);

/// log(sum_i exp(a_i)) with max shift; -inf for an empty or all -inf input.
double log_sum_exp(std::span<const double> a);

}  // namespace wiener
