#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "wiener/error.hpp"
#include "wiener/indirect.hpp"
#include "wiener/numerics.hpp"

using namespace wiener;

namespace {

// E{V^k} for V ~ N(0, 1): (k-1)!! for even k, 0 for odd k.
double normal_moment(int k) {
  if (k % 2) return 0.0;
  double m = 1.0;
  for (int j = k - 1; j > 0; j -= 2) m *= j;
  return m;
}

}  // namespace

TEST(GaussHermite, OrderOne) {
  const auto rule = gauss_hermite(1);
  ASSERT_EQ(rule.nodes.size(), 1u);
  EXPECT_EQ(rule.nodes[0], 0.0);
  EXPECT_NEAR(rule.weights[0], std::sqrt(std::numbers::pi), 1e-15);
}

TEST(GaussHermite, OrderTwo) {
  const auto rule = gauss_hermite(2);
  EXPECT_NEAR(rule.nodes[0], -1.0 / std::numbers::sqrt2, 1e-15);
  EXPECT_NEAR(rule.nodes[1], 1.0 / std::numbers::sqrt2, 1e-15);
  EXPECT_NEAR(rule.weights[0], std::sqrt(std::numbers::pi) / 2.0, 1e-15);
  EXPECT_NEAR(rule.weights[1], std::sqrt(std::numbers::pi) / 2.0, 1e-15);
}

TEST(GaussHermite, SixthGaussianMoment) {
  const auto rule = gauss_hermite(20);
  EXPECT_NEAR(rule.expect_standard_normal([](double v) { return std::pow(v, 6); }), 15.0, 1e-8);
}

TEST(GaussHermite, ExactThroughDegreeTwoKMinusOne) {
  for (std::size_t k : {1u, 2u, 5u, 10u, 20u}) {
    const auto rule = gauss_hermite(k);
    for (int d = 0; d <= static_cast<int>(2 * k - 1); ++d) {
      const double got = rule.expect_standard_normal([d](double v) { return std::pow(v, d); });
      const double want = normal_moment(d);
      // Odd moments cancel terms of size ~E|V|^d, which bounds the roundoff.
      const double scale = std::max(1.0, normal_moment(d + d % 2));
      EXPECT_NEAR(got, want, 1e-13 * scale) << "order " << k << " degree " << d;
    }
  }
}

TEST(GaussHermite, StructuralInvariants) {
  for (std::size_t k : {3u, 10u, 101u, 500u, 1000u, 2000u}) {
    const auto rule = gauss_hermite(k);
    double sum = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      sum += rule.weights[i];
      EXPECT_TRUE(std::isfinite(rule.log_weights[i]));
      EXPECT_GE(rule.weights[i], 0.0);
      EXPECT_EQ(rule.nodes[i], -rule.nodes[k - 1 - i]);
      EXPECT_NEAR(rule.log_weights[i], rule.log_weights[k - 1 - i], 1e-9 * std::abs(rule.log_weights[i]) + 1e-12);
      if (i > 0) EXPECT_LT(rule.nodes[i - 1], rule.nodes[i]);
    }
    // weights are positive where representable
    EXPECT_GT(rule.weights[k / 2], 0.0);
    EXPECT_NEAR(sum, std::sqrt(std::numbers::pi), 1e-10 * std::sqrt(std::numbers::pi)) << "order " << k;
  }
}

TEST(GaussHermite, LogSpaceExpectationMatchesDirect) {
  const auto rule = gauss_hermite(60);
  auto h = [](double v) { return -0.5 * (v - 0.3) * (v - 0.3) * 4.0; };
  const double direct = std::log(rule.expect_standard_normal([&](double v) { return std::exp(h(v)); }));
  EXPECT_NEAR(rule.log_expect_exp_standard_normal(h), direct, 1e-12);
  // a term that would underflow without the shift
  auto far = [](double v) { return -2000.0 - v * v; };
  const double shifted = rule.log_expect_exp_standard_normal(far);
  EXPECT_TRUE(std::isfinite(shifted));
  // E{exp(-V^2)} = 1/sqrt(3)
  EXPECT_NEAR(shifted, -2000.0 - 0.5 * std::log(3.0), 1e-10);
}

TEST(GaussHermite, RejectsOutOfRangeOrder) {
  EXPECT_THROW(gauss_hermite(0), InvalidArgument);
  EXPECT_THROW(gauss_hermite(2001), InvalidArgument);
}

TEST(MinimizeScalar, QuadraticBowl) {
  const auto r = minimize_scalar([](double x) { return (x - 0.5) * (x - 0.5); });
  EXPECT_NEAR(r.argmin, 0.5, 1e-6);
  EXPECT_FALSE(r.degenerate);
}

TEST(MinimizeScalar, QuarticStationaryPoint) {
  OptimizerSettings s;
  s.lo = 0.0;
  s.hi = 2.0;
  const auto r = minimize_scalar([](double x) { return x * x * x * x - x * x; }, s);
  EXPECT_NEAR(r.argmin, 1.0 / std::numbers::sqrt2, s.abs_tol);
  EXPECT_NEAR(r.min_value, -0.25, 1e-12);
}

TEST(MinimizeScalar, HonoursRequestedTolerance) {
  for (double tol : {1e-3, 1e-6, 1e-8}) {
    OptimizerSettings s;
    s.abs_tol = tol;
    const auto r = minimize_scalar([](double x) { return std::cosh(x - 1.234567); }, s);
    EXPECT_NEAR(r.argmin, 1.234567, tol);
  }
}

TEST(MinimizeScalar, FlatCostIsDegenerate) {
  const auto r = minimize_scalar([](double) { return 4.0; });
  EXPECT_TRUE(r.degenerate);
  EXPECT_GE(r.argmin, -3.0);
  EXPECT_LE(r.argmin, 3.0);
  EXPECT_EQ(r.argmin, 0.0);  // tie broken toward smallest |x|
}

TEST(MinimizeScalar, GlobalMinimumFromGridScan) {
  // local minimum near -2, global one near 1.5
  auto f = [](double x) { return 0.1 * (x + 2.0) * (x + 2.0) * (x - 1.5) * (x - 1.5) + 0.2 * (x - 1.5) * (x - 1.5) - 0.01 * x; };
  EXPECT_NEAR(minimize_scalar(f).argmin, 1.5, 0.05);
}

TEST(MinimizeScalar, ReportsNonFiniteCost) {
  try {
    minimize_scalar([](double x) { return x > 1.0 ? std::nan("") : x * x; });
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("x = "), std::string::npos);
  }
}

TEST(MinimizeScalar, RejectsBadSettings) {
  OptimizerSettings s;
  s.lo = 1.0;
  s.hi = 1.0;
  EXPECT_THROW(minimize_scalar([](double x) { return x; }, s), InvalidArgument);
  s = {};
  s.abs_tol = 0.0;
  EXPECT_THROW(minimize_scalar([](double x) { return x; }, s), InvalidArgument);
}

TEST(LeastSquares, ConsistentSystemHasZeroResiduals) {
  Eigen::MatrixXd x(4, 2);
  x << 1, 0, 0, 1, 1, 1, 2, -1;
  const Eigen::Vector2d beta(0.3, -1.7);
  const auto fit = least_squares(x, x * beta);
  EXPECT_LT(fit.residuals.norm(), 1e-14);
  EXPECT_LT((fit.coefficients - beta).norm(), 1e-14);
}

TEST(LeastSquares, SingleRegressor) {
  Eigen::MatrixXd u(5, 1);
  u << 1, -2, 0.5, 3, 4;
  const auto fit = least_squares(u, 2.0 * u.col(0));
  EXPECT_NEAR(fit.coefficients[0], 2.0, 1e-14);
}

TEST(LeastSquares, AgreesWithNormalEquationsAndResidualsAreOrthogonal) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::MatrixXd x(300, 4);
    Eigen::VectorXd y(300);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = normal(rng);
      y[i] = normal(rng);
    }
    const auto fit = least_squares(x, y);
    const Eigen::VectorXd oracle = (x.transpose() * x).llt().solve(x.transpose() * y);
    EXPECT_LT((fit.coefficients - oracle).norm(), 1e-8);
    EXPECT_LT((x.transpose() * fit.residuals).cwiseAbs().maxCoeff(), 1e-8 * y.norm());
  }
}

TEST(LeastSquares, RankDeficiencyReportsSingularValue) {
  Eigen::MatrixXd x(5, 2);
  x.col(0) << 1, 2, 3, 4, 5;
  x.col(1) = 2.0 * x.col(0);
  try {
    least_squares(x, Eigen::VectorXd::Ones(5));
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("singular value"), std::string::npos);
  }
  EXPECT_THROW(least_squares(Eigen::MatrixXd::Ones(1, 2), Eigen::VectorXd::Ones(1)), InvalidArgument);
}

TEST(JacobianFd, LinearMapIsExact) {
  Eigen::MatrixXd a(3, 2);
  a << 1, 2, -3, 0.5, 4, -1;
  const auto j = jacobian_fd([&](const Eigen::VectorXd& p) { return Eigen::VectorXd(a * p); }, Eigen::Vector2d(0.3, -0.2));
  EXPECT_LT((j - a).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(JacobianFd, GaussianBindingFunction) {
  const auto j = jacobian_fd(
      [](const Eigen::VectorXd& p) { return Eigen::VectorXd(beta_map_gaussian(p[0], 1.0 / 3.0, 0.2)); },
      Eigen::VectorXd::Constant(1, 0.5));
  EXPECT_NEAR(j(0, 0), 2.35, 1e-6);
  EXPECT_NEAR(j(1, 0), 1.0, 1e-6);
}

TEST(JacobianFd, ErrorDecaysQuadratically) {
  // f(x) = x^3 + sin(x): f'(0.7) = 3 * 0.49 + cos(0.7)
  auto map = [](const Eigen::VectorXd& p) { return Eigen::VectorXd::Constant(1, std::pow(p[0], 3) + std::sin(p[0])); };
  const double exact = 3.0 * 0.49 + std::cos(0.7);
  const double e1 = std::abs(jacobian_fd(map, Eigen::VectorXd::Constant(1, 0.7), 1e-3)(0, 0) - exact);
  const double e2 = std::abs(jacobian_fd(map, Eigen::VectorXd::Constant(1, 0.7), 1e-4)(0, 0) - exact);
  const double e3 = std::abs(jacobian_fd(map, Eigen::VectorXd::Constant(1, 0.7), 1e-5)(0, 0) - exact);
  EXPECT_NEAR(e1 / e2, 100.0, 5.0);
  EXPECT_LT(e3, e2);
}

TEST(JacobianFd, ReportsNonFiniteValues) {
  auto map = [](const Eigen::VectorXd& p) { return Eigen::VectorXd::Constant(1, std::log(p[0])); };
  EXPECT_THROW(jacobian_fd(map, Eigen::VectorXd::Constant(1, 0.0), 1e-3), NumericError);
}

TEST(LogSumExp, Basics) {
  const std::vector<double> a{-1000.0, -1000.0};
  EXPECT_NEAR(log_sum_exp(a), -1000.0 + std::log(2.0), 1e-12);
  EXPECT_EQ(log_sum_exp(std::vector<double>{}), -INFINITY);
}
