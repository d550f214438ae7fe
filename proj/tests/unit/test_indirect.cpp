#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss.hpp>
#include <cmath>

#include "support.hpp"
#include "wiener/error.hpp"
#include "wiener/experiment.hpp"
#include "wiener/indirect.hpp"

using namespace wiener;
using wiener::testing::cubic_example;
using wiener::testing::make_record;

namespace {

constexpr double kSu2 = 1.0 / 3.0;
constexpr double kSv2 = 0.2;

// BLA of (theta u0 + u1 + v)^3 on (u0, u1) from first principles: with white
// regressors beta_k = E{y u_k} / su2, where E_v{(a + v)^3} = a^3 + 3 a sv2 and
// the uniform-input expectations are taken by Gauss-Legendre quadrature (exact
// for these degree-4 polynomials).
Eigen::Vector2d uniform_map_by_quadrature(double theta, double su2, double sv2) {
  using GL = boost::math::quadrature::gauss<double, 10>;
  const double L = std::sqrt(3.0 * su2);
  const double density = 1.0 / (4.0 * L * L);
  Eigen::Vector2d beta;
  for (int k = 0; k < 2; ++k) {
    const double moment = GL::integrate(
        [&](double u0) {
          return GL::integrate(
              [&](double u1) {
                const double a = theta * u0 + u1;
                return (a * a * a + 3.0 * a * sv2) * (k == 0 ? u0 : u1);
              },
              -L, L);
        },
        -L, L);
    beta[k] = moment * density / su2;
  }
  return beta;
}

BlaEstimate bla_at(const Eigen::VectorXd& beta, std::size_t N) {
  BlaEstimate b;
  b.lags = {0, 1};
  b.beta_hat = beta;
  b.N = N;
  return b;
}

}  // namespace

TEST(BetaMap, GaussianExamples) {
  EXPECT_NEAR(beta_map_gaussian(0.5, kSu2, kSv2)[0], 0.925, 1e-15);
  EXPECT_NEAR(beta_map_gaussian(0.5, kSu2, kSv2)[1], 1.85, 1e-15);
  const auto at0 = beta_map_gaussian(0.0, kSu2, kSv2);
  EXPECT_EQ(at0[0], 0.0);
  EXPECT_NEAR(at0[1], 3.0 * (kSu2 + kSv2), 1e-15);
  for (double theta : {-2.0, -0.3, 0.7, 2.5}) {
    const auto b = beta_map_gaussian(theta, kSu2, kSv2);
    EXPECT_NEAR(b[0] / b[1], theta, 1e-15 * std::max(1.0, std::abs(theta)));
  }
}

TEST(BetaMap, UniformExamples) {
  EXPECT_NEAR(beta_map_uniform(0.5, kSu2, kSv2)[0], 0.875, 1e-15);
  EXPECT_NEAR(beta_map_uniform(0.5, kSu2, kSv2)[1], 1.45, 1e-15);
  const auto at0 = beta_map_uniform(0.0, kSu2, kSv2);
  EXPECT_EQ(at0[0], 0.0);
  EXPECT_NEAR(at0[1], 1.8 * kSu2 + 3.0 * kSv2, 1e-15);
}

TEST(BetaMap, UniformMatchesMomentExpansion) {
  for (double theta : {-1.5, 0.0, 0.25, 0.5, 1.0})
    for (double sv2 : {0.0, 0.2, 1.0}) {
      const Eigen::Vector2d want = uniform_map_by_quadrature(theta, kSu2, sv2);
      EXPECT_LT((beta_map_uniform(theta, kSu2, sv2) - want).norm(), 1e-12) << theta << ' ' << sv2;
    }
}

TEST(BetaMap, GaussianMatchesMomentExpansion) {
  // E{u^4} = 3 su2^2, E{u^2} = su2 for the gaussian input
  for (double theta : {-1.5, 0.0, 0.5, 1.0}) {
    const double b1 = (std::pow(theta, 3) * 3.0 * kSu2 * kSu2 + 3.0 * theta * kSu2 * (kSu2 + kSv2)) / kSu2;
    const double b2 = (3.0 * kSu2 * kSu2 + 3.0 * (theta * theta * kSu2 + kSv2) * kSu2) / kSu2;
    EXPECT_NEAR(beta_map_gaussian(theta, kSu2, kSv2)[0], b1, 1e-14);
    EXPECT_NEAR(beta_map_gaussian(theta, kSu2, kSv2)[1], b2, 1e-14);
  }
}

TEST(BetaMap, DerivativesMatchFiniteDifferences) {
  for (double theta : {-1.0, 0.0, 0.5, 2.0}) {
    const Eigen::VectorXd p = Eigen::VectorXd::Constant(1, theta);
    const auto g_fd = jacobian_fd([](const Eigen::VectorXd& x) -> Eigen::VectorXd { return beta_map_gaussian(x[0], kSu2, kSv2); }, p);
    const auto u_fd = jacobian_fd([](const Eigen::VectorXd& x) -> Eigen::VectorXd { return beta_map_uniform(x[0], kSu2, kSv2); }, p);
    EXPECT_LT((beta_map_gaussian_derivative(theta, kSu2, kSv2) - g_fd.col(0)).norm(), 1e-8);
    EXPECT_LT((beta_map_uniform_derivative(theta, kSu2, kSv2) - u_fd.col(0)).norm(), 1e-8);
  }
  EXPECT_NEAR(beta_map_gaussian_derivative(0.5, kSu2, kSv2)[0], 2.35, 1e-14);
  EXPECT_NEAR(beta_map_gaussian_derivative(0.5, kSu2, kSv2)[1], 1.0, 1e-14);
}

TEST(BetaMap, SecondCoefficientIsEvenInTheta) {
  for (int i = 0; i <= 40; ++i) {
    const double theta = 0.075 * i;
    EXPECT_EQ(beta_map_gaussian(theta, kSu2, kSv2)[1], beta_map_gaussian(-theta, kSu2, kSv2)[1]);
    EXPECT_EQ(beta_map_gaussian(theta, kSu2, kSv2)[0], -beta_map_gaussian(-theta, kSu2, kSv2)[0]);
  }
}

TEST(SimulatedMap, NoProcessNoiseIsDeterministicFit) {
  SystemSpec spec = cubic_example();
  spec.sigma_v2 = 0.0;
  const auto u = gen_white(spec.input_dist, 501, Seed{70});
  const auto a = beta_map_simulated(0.7, u, 1, spec, 3, Seed{1}, {0, 1});
  const auto b = beta_map_simulated(0.7, u, 1, spec, 8, Seed{99}, {0, 1});
  EXPECT_LT((a - b).norm(), 1e-12);

  spec.theta[0] = 0.7;
  DataRecord data{u, {}, 1};
  for (double z : linear_output(spec.fir, spec.theta, u, 1)) data.y.push_back(z * z * z);
  const auto direct = least_squares(bla_regressors(data, {0, 1}), Eigen::Map<const Eigen::VectorXd>(data.y.data(), 500));
  EXPECT_LT((a - direct.coefficients).norm(), 1e-12);
}

TEST(SimulatedMap, ApproachesBindingFunction) {
  const SystemSpec spec = cubic_example();
  constexpr std::size_t kN = 100000;
  const auto u = gen_white(spec.input_dist, kN + 1, Seed{71});
  const Eigen::VectorXd beta = beta_map_simulated(0.5, u, 1, spec, 10, Seed{72}, {0, 1});
  // The sandwich standard errors of a single noise-free-output fit over the
  // same input bound the error from above: averaging over S only shrinks the
  // process-noise part.
  DataRecord single{u, {}, 1};
  const auto v = gen_white(Distribution::gaussian(spec.sigma_v2), kN, Seed{73});
  single.y = simulate(spec, u, v, std::vector<double>(kN, 0.0), 1).y;
  const auto est = estimate_weighting(single, fit_bla(single, {0, 1}));
  const Eigen::Vector2d want = beta_map_gaussian(0.5, kSu2, kSv2);
  for (int i = 0; i < 2; ++i) EXPECT_NEAR(beta[i], want[i], 3.0 * std::sqrt(est.cov_beta(i, i))) << i;
}

TEST(SimulatedMap, ReplayIsBitIdentical) {
  const SystemSpec spec = cubic_example();
  const auto u = gen_white(spec.input_dist, 301, Seed{74});
  const SimulatedBetaMap a(u, 1, spec, 5, Seed{75}, {0, 1}), b(u, 1, spec, 5, Seed{75}, {0, 1});
  for (double theta : {0.1, 0.5, 1.2}) {
    const Eigen::VectorXd x = a(theta), y = b(theta), z = a(theta);
    EXPECT_EQ(x, y);
    EXPECT_EQ(x, z);
  }
  EXPECT_NE(a(0.5), SimulatedBetaMap(u, 1, spec, 5, Seed{76}, {0, 1})(0.5));
}

TEST(SimulatedMap, PerSimulationInputsStackCorrectly) {
  const SystemSpec spec = cubic_example();
  const auto u = gen_white(spec.input_dist, 301, Seed{77});
  // identical inputs: stacking equals fitting the averaged output
  const SimulatedBetaMap shared(u, 1, spec, 4, Seed{78}, {0, 1});
  const SimulatedBetaMap stacked(std::vector<std::vector<double>>(4, u), 1, spec, Seed{78}, {0, 1});
  EXPECT_EQ(stacked.S(), 4u);
  EXPECT_LT((shared(0.5) - stacked(0.5)).norm(), 1e-12);
  EXPECT_THROW(SimulatedBetaMap({u, std::vector<double>(200, 0.1)}, 1, spec, Seed{1}, {0, 1}), InvalidArgument);
  EXPECT_THROW(SimulatedBetaMap(std::vector<std::vector<double>>{}, 1, spec, Seed{1}, {0, 1}), InvalidArgument);
  EXPECT_THROW(SimulatedBetaMap(u, 1, spec, 0, Seed{1}, {0, 1}), InvalidArgument);
}

TEST(Step2, ExactBetaIsFixedPoint) {
  const auto map = BetaMap::analytic_gaussian(kSu2, kSv2);
  Eigen::Matrix2d W;
  W << 3.0, -1.2, -1.2, 0.9;
  const auto r = step2(bla_at(map(0.5), 1000), W, Weighting::Sandwich, map);
  EXPECT_NEAR(r.theta_hat, 0.5, 1e-6);
  EXPECT_NEAR(r.min_value, 0.0, 1e-12);
  EXPECT_EQ(r.inflation, 1.0);
  EXPECT_NEAR(r.G(0, 0), 2.35, 1e-4);
}

TEST(Step2, LeftInverseOnTheBracket) {
  const auto map = BetaMap::analytic_gaussian(kSu2, kSv2);
  const Eigen::Matrix2d W = Eigen::Matrix2d::Identity();
  for (int i = 0; i < 50; ++i) {
    const double theta = -2.9 + 5.8 * i / 49.0;
    EXPECT_NEAR(step2(bla_at(map(theta), 1000), W, Weighting::Identity, map).theta_hat, theta, 1e-6) << theta;
  }
}

TEST(Step2, ArgminInvariantToWeightScale) {
  const auto data = make_record(cubic_example(), 1000, 79);
  const auto bla = estimate_weighting(data, fit_bla(data, {0, 1}));
  const auto map = BetaMap::analytic_gaussian(kSu2, kSv2);
  const auto a = step2(bla, bla.W, Weighting::Sandwich, map);
  const auto b = step2(bla, 7.0 * bla.W, Weighting::Sandwich, map);
  EXPECT_NEAR(a.theta_hat, b.theta_hat, 1e-9);
  EXPECT_NEAR(b.min_value, 7.0 * a.min_value, 1e-9 * b.min_value);
}

TEST(Step2, PredictedCovarianceForms) {
  const auto data = make_record(cubic_example(), 1000, 80);
  const auto bla = estimate_weighting(data, fit_bla(data, {0, 1}));
  const auto map = BetaMap::analytic_gaussian(kSu2, kSv2);
  // optimal weighting: the sandwich collapses to [G^T W G]^-1 / N
  const auto opt = step2(bla, bla.W, Weighting::Sandwich, map);
  const double collapsed = 1.0 / ((opt.G.transpose() * bla.W * opt.G)(0, 0) * 1000.0);
  EXPECT_NEAR(opt.predicted_cov(0, 0), collapsed, 1e-10 * collapsed);
  // identity weighting: (G^T G)^-1 G^T C G (G^T G)^-1
  const auto unw = step2(bla, Eigen::Matrix2d::Identity(), Weighting::Identity, map);
  const double gg = unw.G.squaredNorm();
  const double want = (unw.G.transpose() * bla.cov_beta * unw.G)(0, 0) / (gg * gg);
  EXPECT_NEAR(unw.predicted_cov(0, 0), want, 1e-10 * want);
  EXPECT_GE(unw.predicted_cov(0, 0), opt.predicted_cov(0, 0) * (1.0 - 1e-9));
}

TEST(Step2, RejectsInvalidWeighting) {
  const auto map = BetaMap::analytic_gaussian(kSu2, kSv2);
  const auto bla = bla_at(map(0.5), 1000);
  Eigen::Matrix2d indefinite;
  indefinite << 1.0, 2.0, 2.0, 1.0;
  Eigen::Matrix2d asymmetric;
  asymmetric << 1.0, 0.5, 0.0, 1.0;
  EXPECT_THROW(step2(bla, indefinite, Weighting::Sandwich, map), InvalidArgument);
  EXPECT_THROW(step2(bla, asymmetric, Weighting::Sandwich, map), InvalidArgument);
  EXPECT_THROW(step2(bla, Eigen::Matrix3d::Identity(), Weighting::Sandwich, map), InvalidArgument);
  EXPECT_THROW(step2(bla_at(map(0.5), 0), Eigen::Matrix2d::Identity(), Weighting::Identity, map), InvalidArgument);
}

TEST(InvertBeta1, ExamplesAndBackSubstitution) {
  EXPECT_NEAR(invert_beta1(0.925, DistributionKind::GaussianWhite, kSu2, kSv2), 0.5, 1e-8);
  EXPECT_NEAR(invert_beta1(0.875, DistributionKind::UniformWhite, kSu2, kSv2), 0.5, 1e-8);
  EXPECT_EQ(invert_beta1(0.0, DistributionKind::GaussianWhite, kSu2, kSv2), 0.0);
  for (double target : {-50.0, -1.0, 1e-9, 0.3, 7.0, 1e4}) {
    const double g = invert_beta1(target, DistributionKind::GaussianWhite, kSu2, kSv2);
    EXPECT_NEAR(beta_map_gaussian(g, kSu2, kSv2)[0], target, 1e-10 * std::max(1.0, std::abs(target)));
    const double u = invert_beta1(target, DistributionKind::UniformWhite, kSu2, kSv2);
    EXPECT_NEAR(beta_map_uniform(u, kSu2, kSv2)[0], target, 1e-10 * std::max(1.0, std::abs(target)));
  }
  EXPECT_THROW(invert_beta1(1.0, DistributionKind::GaussianWhite, 0.0, 0.0), InvalidArgument);
}

TEST(IndirectEstimators, NoiseFreeRecovery) {
  for (auto kind : {DistributionKind::GaussianWhite, DistributionKind::UniformWhite}) {
    const SystemSpec spec = cubic_example(kind);
    const auto data = make_record(spec, 20000, 81);
    EXPECT_NEAR(zero_order_estimate(data, spec).theta_hat, 0.5, 0.05);
    for (bool weighted : {false, true}) {
      const auto r = first_order_estimate(data, spec, weighted);
      EXPECT_NEAR(r.theta_hat, 0.5, 0.05);
      EXPECT_EQ(r.weighting_used, weighted ? Weighting::Sandwich : Weighting::Identity);
      EXPECT_GT(r.predicted_cov(0, 0), 0.0);
    }
  }
}

TEST(IndirectEstimators, AnalyticMapsNeedTheCubicExample) {
  SystemSpec spec = cubic_example();
  const auto data = make_record(spec, 200, 82);
  spec.nonlinearity = Nonlinearity::identity();
  EXPECT_THROW(zero_order_estimate(data, spec), InvalidArgument);
  EXPECT_THROW(first_order_estimate(data, spec, true), InvalidArgument);
}

TEST(IndirectEstimators, SimulatedMapInflation) {
  // Variance of the simulated-map estimate relative to the analytic-map
  // estimate, each simulation with its own input and noise draw.
  constexpr std::size_t kReps = 400;
  const SystemSpec spec = cubic_example();
  const Seed master{83};
  for (std::size_t S : {1u, 5u, 50u}) {
    std::vector<double> analytic, simulated;
    for (std::size_t r = 0; r < kReps; ++r) {
      const auto data = make_record(spec, 1000, master.value, r);
      analytic.push_back(first_order_estimate(data, spec, true).theta_hat);
      std::vector<std::vector<double>> inputs;
      for (std::size_t s = 0; s < S; ++s)
        inputs.push_back(gen_white(spec.input_dist, data.u.size(), derive_seed(master, r, StreamRole::SimulationInput, s)));
      const auto sim = first_order_simulated_estimate(data, spec, inputs, derive_seed(master, r, StreamRole::SimulationNoise));
      EXPECT_NEAR(sim.inflation, 1.0 + 1.0 / static_cast<double>(S), 1e-15);
      simulated.push_back(sim.theta_hat);
    }
    const double ratio = std::pow(mean_std(simulated).second / mean_std(analytic).second, 2);
    const double want = 1.0 + 1.0 / static_cast<double>(S);
    EXPECT_NEAR(ratio / want, 1.0, 0.25) << "S = " << S << " ratio " << ratio;
  }
}
