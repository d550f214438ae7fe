#include "wiener/bla.hpp"

#include <cmath>
#include <ostream>

#include "text.hpp"
#include "wiener/error.hpp"
#include "wiener/numerics.hpp"

namespace wiener {
namespace {

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& m) { return 0.5 * (m + m.transpose()); }

void write_matrix(std::ostream& os, const char* key, const Eigen::MatrixXd& m) {
  os << key << ':';
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) os << ' ' << detail::format_double(m(i, j));
  os << '\n';
}

}  // namespace

Eigen::MatrixXd bla_regressors(const DataRecord& data, const std::vector<int>& lags) {
  data.validate();
  if (lags.empty()) throw InvalidArgument("BLA needs at least one lag");
  for (int lag : lags)
    if (lag < 0 || static_cast<std::size_t>(lag) > data.history)
      throw InvalidArgument("BLA lag " + std::to_string(lag) + " not covered by the input history");
  const auto n = static_cast<Eigen::Index>(data.N());
  Eigen::MatrixXd phi(n, static_cast<Eigen::Index>(lags.size()));
  for (Eigen::Index t = 0; t < n; ++t)
    for (std::size_t k = 0; k < lags.size(); ++k) phi(t, static_cast<Eigen::Index>(k)) = data.u_at(t + 1 - lags[k]);
  return phi;
}

BlaEstimate fit_bla(const DataRecord& data, const std::vector<int>& lags) {
  const Eigen::MatrixXd phi = bla_regressors(data, lags);
  if (data.N() <= lags.size()) throw InvalidArgument("BLA needs more samples than coefficients");
  const Eigen::Map<const Eigen::VectorXd> y(data.y.data(), static_cast<Eigen::Index>(data.N()));
  LeastSquaresFit fit = least_squares(phi, y);
  BlaEstimate est;
  est.lags = lags;
  est.beta_hat = std::move(fit.coefficients);
  est.residuals = std::move(fit.residuals);
  est.N = data.N();
  return est;
}

BlaEstimate estimate_weighting(const DataRecord& data, BlaEstimate est) {
  if (est.N != data.N() || est.residuals.size() != static_cast<Eigen::Index>(data.N()))
    throw InvalidArgument("estimate_weighting: estimate was not fitted on this data record");
  const Eigen::MatrixXd phi = bla_regressors(data, est.lags);
  const double n = static_cast<double>(est.N);
  const auto m = phi.cols();

  const Eigen::MatrixXd weighted = phi.array().colwise() * est.residuals.array().square();
  est.I_hat = symmetrize(phi.transpose() * weighted / n);
  est.J_hat = symmetrize(2.0 * phi.transpose() * phi / n);

  // Residuals at rounding level leave I_hat without information.
  const Eigen::Map<const Eigen::VectorXd> y(data.y.data(), static_cast<Eigen::Index>(data.N()));
  if (!(est.residuals.norm() > 1e-12 * y.norm()))
    throw NumericError("estimate_weighting: I_hat is zero (the BLA fits the data exactly)");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig_i(est.I_hat, Eigen::EigenvaluesOnly);
  const double imax = eig_i.eigenvalues().maxCoeff();
  const double imin = eig_i.eigenvalues().minCoeff();
  est.ridge_applied = !(imin > 0.0) || imax / imin > 1e12;
  if (est.ridge_applied)
    est.I_hat += Eigen::MatrixXd::Identity(m, m) * (1e-10 * est.I_hat.trace() / static_cast<double>(m));

  Eigen::LDLT<Eigen::MatrixXd> j_ldlt(est.J_hat);
  if (j_ldlt.info() != Eigen::Success || !j_ldlt.isPositive() || j_ldlt.vectorD().minCoeff() <= 0.0)
    throw NumericError("estimate_weighting: J_hat is singular");
  const Eigen::MatrixXd j_inv = j_ldlt.solve(Eigen::MatrixXd::Identity(m, m));
  est.cov_beta = symmetrize(j_inv * (4.0 * est.I_hat) * j_inv / n);
  // W = [Cov(sqrt(N) beta_hat)]^-1 = J (4 I)^-1 J
  est.W = symmetrize(est.J_hat * (4.0 * est.I_hat).ldlt().solve(est.J_hat));
  est.has_weighting = true;
  return est;
}

BussgangGain bussgang_gain(const SystemSpec& spec) {
  spec.validate();
  double gain2 = spec.theta.squaredNorm();
  for (const auto& tap : spec.fir.fixed) gain2 += tap.value * tap.value;
  const double sigma_z2 = gain2 * spec.input_dist.variance + spec.sigma_v2;

  BussgangGain out;
  out.gaussian = spec.input_dist.kind == DistributionKind::GaussianWhite;
  switch (spec.nonlinearity.kind()) {
    case NonlinearityKind::Cubic:
      out.b0 = 3.0 * sigma_z2;
      break;
    case NonlinearityKind::Identity:
      out.b0 = 1.0;
      break;
    case NonlinearityKind::Polynomial: {
      const double sigma_z = std::sqrt(sigma_z2);
      static const QuadratureRule rule = gauss_hermite(50);
      out.b0 = rule.expect_standard_normal([&](double x) { return spec.nonlinearity.derivative(sigma_z * x); });
      break;
    }
  }
  return out;
}

void write_report(std::ostream& os, const BlaEstimate& est) {
  os << "N: " << est.N << '\n';
  os << "order: " << est.order() << '\n';
  os << "lags:";
  for (int lag : est.lags) os << ' ' << lag;
  os << '\n';
  write_matrix(os, "beta_hat", est.beta_hat.transpose());
  if (est.has_weighting) {
    write_matrix(os, "I_hat", est.I_hat);
    write_matrix(os, "J_hat", est.J_hat);
    write_matrix(os, "W", est.W);
    write_matrix(os, "cov_beta", est.cov_beta);
    os << "ridge_applied: " << (est.ridge_applied ? "true" : "false") << '\n';
  }
}

}  // namespace wiener
