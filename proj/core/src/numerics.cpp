#include "wiener/numerics.hpp"

#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "text.hpp"
#include "wiener/error.hpp"

namespace wiener {
namespace {

struct HermiteSum {
  double ratio;        // p_n(x) / p_{n-1}(x), orthonormal polynomials
  double log_sum_sq;   // log sum_{k<n} p_k(x)^2
};

// Three-term recurrence for the orthonormal Hermite polynomials with
// periodic rescaling so that large |x| at high order does not overflow.
HermiteSum hermite_sum(std::size_t n, double x) {
  constexpr double kBig = 1e100;
  const double log_big = std::log(kBig);
  double prev = 0.0;
  double cur = std::pow(std::numbers::pi, -0.25);
  double sum = cur * cur;
  double log_scale = 0.0;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double kk = static_cast<double>(k);
    const double next = std::sqrt(2.0 / (kk + 1.0)) * x * cur - std::sqrt(kk / (kk + 1.0)) * prev;
    prev = cur;
    cur = next;
    sum += cur * cur;
    if (std::abs(cur) > kBig) {
      prev /= kBig;
      cur /= kBig;
      sum /= kBig * kBig;
      log_scale += log_big;
    }
  }
  // one more step gives p_n for the Newton ratio
  const double kk = static_cast<double>(n - 1);
  const double pn = std::sqrt(2.0 / (kk + 1.0)) * x * cur - std::sqrt(kk / (kk + 1.0)) * prev;
  return {pn / cur, std::log(sum) + 2.0 * log_scale};
}

}  // namespace

QuadratureRule gauss_hermite(std::size_t order) {
  if (order < 1 || order > 2000)
    throw InvalidArgument("gauss_hermite: order must lie in [1, 2000], got " + std::to_string(order));

  const auto n = static_cast<Eigen::Index>(order);
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd sub(std::max<Eigen::Index>(n - 1, 0));
  for (Eigen::Index k = 0; k + 1 < n; ++k) sub[k] = std::sqrt(static_cast<double>(k + 1) / 2.0);

  Eigen::VectorXd eig = Eigen::VectorXd::Zero(n);
  if (n > 1) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw NumericError("gauss_hermite: tridiagonal eigensolver failed");
    eig = solver.eigenvalues();
  }

  QuadratureRule rule;
  rule.order = order;
  rule.nodes.assign(eig.data(), eig.data() + n);
  std::sort(rule.nodes.begin(), rule.nodes.end());

  const double sqrt_2n = std::sqrt(2.0 * static_cast<double>(order));
  for (auto& x : rule.nodes) {
    for (int it = 0; it < 3; ++it) {
      // p_n' = sqrt(2n) p_{n-1}
      const double step = hermite_sum(order, x).ratio / sqrt_2n;
      x -= step;
      if (std::abs(step) < 1e-15 * std::max(1.0, std::abs(x))) break;
    }
  }
  for (std::size_t i = 0; i < order / 2; ++i) {
    const double sym = 0.5 * (rule.nodes[order - 1 - i] - rule.nodes[i]);
    rule.nodes[i] = -sym;
    rule.nodes[order - 1 - i] = sym;
  }
  if (order % 2 == 1) rule.nodes[order / 2] = 0.0;

  rule.log_weights.resize(order);
  rule.weights.resize(order);
  for (std::size_t i = 0; i < order; ++i) {
    rule.log_weights[i] = -hermite_sum(order, rule.nodes[i]).log_sum_sq;
    rule.weights[i] = std::exp(rule.log_weights[i]);
  }
  return rule;
}

double QuadratureRule::expect_standard_normal(const std::function<double(double)>& g) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < order; ++i) acc += weights[i] * g(std::numbers::sqrt2 * nodes[i]);
  return acc / std::sqrt(std::numbers::pi);
}

double QuadratureRule::log_expect_exp_standard_normal(const std::function<double(double)>& h) const {
  std::vector<double> terms(order);
  for (std::size_t i = 0; i < order; ++i) terms[i] = log_weights[i] + h(std::numbers::sqrt2 * nodes[i]);
  return log_sum_exp(terms) - 0.5 * std::log(std::numbers::pi);
}

double log_sum_exp(std::span<const double> a) {
  double peak = -std::numeric_limits<double>::infinity();
  for (double x : a) peak = std::max(peak, x);
  if (!std::isfinite(peak)) return peak;
  double acc = 0.0;
  for (double x : a) acc += std::exp(x - peak);
  return peak + std::log(acc);
}

void OptimizerSettings::validate() const {
  if (!(lo < hi)) throw InvalidArgument("optimizer bracket needs lo < hi");
  if (!(abs_tol > 0.0)) throw InvalidArgument("optimizer abs_tol must be positive");
  if (grid_points < 3) throw InvalidArgument("optimizer needs at least 3 grid points");
  if (max_iter < 1) throw InvalidArgument("optimizer max_iter must be positive");
}

ScalarMinimum minimize_scalar(const std::function<double(double)>& cost, const OptimizerSettings& settings) {
  settings.validate();
  ScalarMinimum out;
  auto eval = [&](double x) {
    const double value = cost(x);
    ++out.evaluations;
    if (!std::isfinite(value))
      throw NumericError("minimize_scalar: cost is " + detail::format_double(value) + " at x = " +
                         detail::format_double(x));
    return value;
  };

  const std::size_t m = settings.grid_points;
  const double h = (settings.hi - settings.lo) / static_cast<double>(m - 1);
  std::vector<double> xs(m), fs(m);
  for (std::size_t i = 0; i < m; ++i) {
    xs[i] = i + 1 == m ? settings.hi : settings.lo + static_cast<double>(i) * h;
    fs[i] = eval(xs[i]);
  }
  const auto [fmin_it, fmax_it] = std::minmax_element(fs.begin(), fs.end());
  const double fmin = *fmin_it;
  const double tie = 1e-12 * (1.0 + std::abs(fmin));
  std::size_t best = 0;
  bool have = false;
  for (std::size_t i = 0; i < m; ++i) {
    if (fs[i] - fmin > tie) continue;
    if (!have || std::abs(xs[i]) < std::abs(xs[best])) best = i;
    have = true;
  }
  out.argmin = xs[best];
  out.min_value = fs[best];
  if (*fmax_it - fmin <= 1e-14 * (1.0 + std::abs(fmin))) {
    out.degenerate = true;
    return out;
  }

  const double a = xs[best == 0 ? 0 : best - 1];
  const double b = xs[best + 1 == m ? m - 1 : best + 1];
  // boost's termination width is about 2^(1-bits) * (|x| + 1/4)
  const double scale = std::max(std::abs(settings.lo), std::abs(settings.hi)) + 0.25;
  int bits = static_cast<int>(std::ceil(1.0 - std::log2(settings.abs_tol / (2.0 * scale))));
  bits = std::clamp(bits, 8, std::numeric_limits<double>::digits / 2);
  std::uintmax_t iters = settings.max_iter;
  const auto [x, fx] = boost::math::tools::brent_find_minima(eval, a, b, bits, iters);
  out.iterations = static_cast<std::size_t>(iters);
  if (fx < out.min_value) {
    out.argmin = x;
    out.min_value = fx;
  }
  return out;
}

LeastSquaresFit least_squares(const Eigen::MatrixXd& regressors, const Eigen::VectorXd& targets) {
  const auto n = regressors.rows();
  const auto m = regressors.cols();
  if (targets.size() != n) throw InvalidArgument("least_squares: targets length differs from regressor rows");
  if (m < 1 || n < m) throw InvalidArgument("least_squares: need rows >= columns >= 1");

  Eigen::HouseholderQR<Eigen::MatrixXd> qr(regressors);
  const Eigen::MatrixXd r = qr.matrixQR().topRows(m).triangularView<Eigen::Upper>();
  LeastSquaresFit fit;
  fit.singular_values = Eigen::JacobiSVD<Eigen::MatrixXd>(r).singularValues();
  const double smax = fit.singular_values[0];
  const double smin = fit.singular_values[m - 1];
  const double tol = static_cast<double>(std::max(n, m)) * std::numeric_limits<double>::epsilon() * smax;
  if (!(smin > tol))
    throw NumericError("least_squares: regressor matrix is rank deficient (smallest singular value " +
                       detail::format_double(smin) + ")");
  fit.coefficients = qr.solve(targets);
  fit.residuals = targets - regressors * fit.coefficients;
  return fit;
}

Eigen::MatrixXd jacobian_fd(const VectorMap& map, const Eigen::VectorXd& point, double step) {
  if (!(step > 0.0)) throw InvalidArgument("jacobian_fd: step must be positive");
  Eigen::MatrixXd jac;
  for (Eigen::Index j = 0; j < point.size(); ++j) {
    Eigen::VectorXd plus = point, minus = point;
    plus[j] += step;
    minus[j] -= step;
    const Eigen::VectorXd fp = map(plus);
    const Eigen::VectorXd fm = map(minus);
    if (!fp.allFinite() || !fm.allFinite())
      throw NumericError("jacobian_fd: map is not finite near coordinate " + std::to_string(j));
    if (j == 0) jac.resize(fp.size(), point.size());
    jac.col(j) = (fp - fm) / (2.0 * step);
  }
  return jac;
}

}  // namespace wiener
