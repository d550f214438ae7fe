#include "wiener/indirect.hpp"

#include <cmath>

#include "text.hpp"
#include "wiener/error.hpp"

namespace wiener {
namespace {

void require_cubic_example(const SystemSpec& spec) {
  spec.validate();
  const auto& fir = spec.fir;
  const bool example = fir.free_lags == std::vector<int>{0} && fir.fixed.size() == 1 && fir.fixed[0].lag == 1 &&
                       fir.fixed[0].value == 1.0;
  if (!example || spec.nonlinearity.kind() != NonlinearityKind::Cubic)
    throw InvalidArgument(
        "analytic binding functions exist only for theta u(t) + u(t-1) with a cubic output; use the simulated map");
}

Eigen::MatrixXd regressors_from(const std::vector<double>& u, std::size_t history, const std::vector<int>& lags) {
  if (lags.empty()) throw InvalidArgument("BLA needs at least one lag");
  for (int lag : lags)
    if (lag < 0 || static_cast<std::size_t>(lag) > history)
      throw InvalidArgument("BLA lag " + std::to_string(lag) + " not covered by the input history");
  const auto n = static_cast<Eigen::Index>(u.size() - history);
  Eigen::MatrixXd phi(n, static_cast<Eigen::Index>(lags.size()));
  for (Eigen::Index t = 0; t < n; ++t)
    for (std::size_t k = 0; k < lags.size(); ++k)
      phi(t, static_cast<Eigen::Index>(k)) = u[static_cast<std::size_t>(t) + history - static_cast<std::size_t>(lags[k])];
  return phi;
}

}  // namespace

Eigen::Vector2d beta_map_gaussian(double theta, double sigma_u2, double sigma_v2) {
  const double gain = 3.0 * sigma_u2 * theta * theta + 3.0 * (sigma_u2 + sigma_v2);
  return {gain * theta, gain};
}

Eigen::Vector2d beta_map_gaussian_derivative(double theta, double sigma_u2, double sigma_v2) {
  return {9.0 * sigma_u2 * theta * theta + 3.0 * (sigma_u2 + sigma_v2), 6.0 * sigma_u2 * theta};
}

Eigen::Vector2d beta_map_uniform(double theta, double sigma_u2, double sigma_v2) {
  const double t2 = theta * theta;
  return {1.8 * sigma_u2 * t2 * theta + 3.0 * (sigma_u2 + sigma_v2) * theta,
          3.0 * sigma_u2 * t2 + 3.0 * (0.6 * sigma_u2 + sigma_v2)};
}

Eigen::Vector2d beta_map_uniform_derivative(double theta, double sigma_u2, double sigma_v2) {
  return {5.4 * sigma_u2 * theta * theta + 3.0 * (sigma_u2 + sigma_v2), 6.0 * sigma_u2 * theta};
}

SimulatedBetaMap::SimulatedBetaMap(std::vector<double> u, std::size_t history, const SystemSpec& spec_template,
                                   std::size_t S, Seed seed, std::vector<int> lags)
    : spec_(spec_template), lags_(std::move(lags)) {
  spec_.validate();
  if (spec_.fir.num_free() != 1) throw InvalidArgument("simulated map: only a single free FIR coefficient is supported");
  splits_.push_back(split_linear(spec_.fir, u, history));
  const Eigen::MatrixXd phi = regressors_from(u, history, lags_);
  least_squares(phi, Eigen::VectorXd::Zero(phi.rows()));  // rank check
  qr_.compute(phi);
  init(S, seed);
}

SimulatedBetaMap::SimulatedBetaMap(const std::vector<std::vector<double>>& inputs, std::size_t history,
                                   const SystemSpec& spec_template, Seed seed, std::vector<int> lags)
    : spec_(spec_template), lags_(std::move(lags)) {
  spec_.validate();
  if (spec_.fir.num_free() != 1) throw InvalidArgument("simulated map: only a single free FIR coefficient is supported");
  if (inputs.empty()) throw InvalidArgument("simulated map needs S >= 1");
  std::vector<Eigen::MatrixXd> blocks;
  Eigen::Index rows = 0;
  for (const auto& u : inputs) {
    if (u.size() != inputs.front().size()) throw InvalidArgument("simulated map: inputs differ in length");
    splits_.push_back(split_linear(spec_.fir, u, history));
    blocks.push_back(regressors_from(u, history, lags_));
    rows += blocks.back().rows();
  }
  Eigen::MatrixXd phi(rows, blocks.front().cols());
  Eigen::Index row = 0;
  for (const auto& block : blocks) {
    phi.middleRows(row, block.rows()) = block;
    row += block.rows();
  }
  least_squares(phi, Eigen::VectorXd::Zero(rows));  // rank check
  qr_.compute(phi);
  init(inputs.size(), seed);
}

void SimulatedBetaMap::init(std::size_t S, Seed seed) {
  if (S < 1) throw InvalidArgument("simulated map needs S >= 1");
  const auto n = static_cast<std::size_t>(splits_.front().fixed.size());
  noise_.reserve(S);
  for (std::size_t s = 0; s < S; ++s)
    noise_.push_back(gen_white(Distribution::gaussian(spec_.sigma_v2), n, derive_seed(seed, s, StreamRole::SimulationNoise)));
}

Eigen::VectorXd SimulatedBetaMap::operator()(double theta) const {
  const Eigen::Index n = splits_.front().fixed.size();
  auto output = [&](const LinearSplit& split, const std::vector<double>& v, Eigen::Index t) {
    return spec_.nonlinearity.value(split.fixed[t] + theta * split.free(t, 0) + v[static_cast<std::size_t>(t)]);
  };
  if (splits_.size() == 1) {
    // The S stacked copies share one regressor matrix, so the stacked
    // least-squares fit equals the fit to the across-s average output.
    Eigen::VectorXd mean_output = Eigen::VectorXd::Zero(n);
    for (const auto& v : noise_)
      for (Eigen::Index t = 0; t < n; ++t) mean_output[t] += output(splits_.front(), v, t);
    mean_output /= static_cast<double>(noise_.size());
    return qr_.solve(mean_output);
  }
  Eigen::VectorXd stacked(n * static_cast<Eigen::Index>(noise_.size()));
  for (std::size_t s = 0; s < noise_.size(); ++s)
    for (Eigen::Index t = 0; t < n; ++t)
      stacked[static_cast<Eigen::Index>(s) * n + t] = output(splits_[s], noise_[s], t);
  return qr_.solve(stacked);
}

Eigen::VectorXd beta_map_simulated(double theta, const std::vector<double>& u, std::size_t history,
                                   const SystemSpec& spec_template, std::size_t S, Seed seed,
                                   const std::vector<int>& lags) {
  return SimulatedBetaMap(u, history, spec_template, S, seed, lags)(theta);
}

BetaMap BetaMap::analytic_gaussian(double sigma_u2, double sigma_v2) {
  if (!(sigma_u2 >= 0.0) || !(sigma_v2 >= 0.0)) throw InvalidArgument("variances must be non-negative");
  return BetaMap(BetaMapKind::AnalyticGaussian, sigma_u2, sigma_v2, nullptr);
}

BetaMap BetaMap::analytic_uniform(double sigma_u2, double sigma_v2) {
  if (!(sigma_u2 >= 0.0) || !(sigma_v2 >= 0.0)) throw InvalidArgument("variances must be non-negative");
  return BetaMap(BetaMapKind::AnalyticUniform, sigma_u2, sigma_v2, nullptr);
}

BetaMap BetaMap::simulated(std::shared_ptr<const SimulatedBetaMap> sim) {
  if (!sim) throw InvalidArgument("simulated map is null");
  return BetaMap(BetaMapKind::Simulated, 0.0, 0.0, std::move(sim));
}

std::size_t BetaMap::m() const { return kind_ == BetaMapKind::Simulated ? sim_->lags().size() : 2; }

Eigen::VectorXd BetaMap::operator()(double theta) const {
  switch (kind_) {
    case BetaMapKind::AnalyticGaussian:
      return beta_map_gaussian(theta, sigma_u2_, sigma_v2_);
    case BetaMapKind::AnalyticUniform:
      return beta_map_uniform(theta, sigma_u2_, sigma_v2_);
    case BetaMapKind::Simulated:
      break;
  }
  return (*sim_)(theta);
}

Eigen::MatrixXd BetaMap::jacobian(double theta) const {
  switch (kind_) {
    case BetaMapKind::AnalyticGaussian:
      return beta_map_gaussian_derivative(theta, sigma_u2_, sigma_v2_);
    case BetaMapKind::AnalyticUniform:
      return beta_map_uniform_derivative(theta, sigma_u2_, sigma_v2_);
    case BetaMapKind::Simulated:
      break;
  }
  return jacobian_fd([this](const Eigen::VectorXd& p) { return (*sim_)(p[0]); }, Eigen::VectorXd::Constant(1, theta),
                     1e-4);
}

double BetaMap::inflation() const {
  return kind_ == BetaMapKind::Simulated ? 1.0 + 1.0 / static_cast<double>(sim_->S()) : 1.0;
}

IndirectReport step2(const BlaEstimate& bla, const Eigen::MatrixXd& W, Weighting weighting, const BetaMap& map,
                     const OptimizerSettings& settings) {
  const auto m = static_cast<Eigen::Index>(map.m());
  if (bla.beta_hat.size() != m || W.rows() != m || W.cols() != m)
    throw InvalidArgument("step2: beta_hat, W and the binding function disagree on dimension");
  if (!W.allFinite() || (W - W.transpose()).norm() > 1e-10 * W.norm())
    throw InvalidArgument("step2: weighting matrix must be symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(W);
  if (llt.info() != Eigen::Success) throw InvalidArgument("step2: weighting matrix is not positive definite");
  if (bla.N == 0) throw InvalidArgument("step2: BLA estimate carries no sample count");

  auto cost = [&](double theta) {
    const Eigen::VectorXd d = map(theta) - bla.beta_hat;
    return d.dot(W * d);
  };
  const ScalarMinimum best = minimize_scalar(cost, settings);

  IndirectReport out;
  out.theta_hat = best.argmin;
  out.min_value = best.min_value;
  out.iterations = best.iterations;
  out.evaluations = best.evaluations;
  out.degenerate = best.degenerate;
  out.weighting_used = weighting;
  out.inflation = map.inflation();
  out.G = map.jacobian(best.argmin);

  const Eigen::MatrixXd info = out.G.transpose() * W * out.G;
  const Eigen::MatrixXd info_inv = info.inverse();
  if (bla.has_weighting) {
    const Eigen::MatrixXd sandwich = info_inv * out.G.transpose() * W * bla.cov_beta * W * out.G * info_inv;
    out.predicted_cov = out.inflation * 0.5 * (sandwich + sandwich.transpose());
  } else {
    out.predicted_cov = out.inflation * info_inv / static_cast<double>(bla.N);
  }
  return out;
}

double invert_beta1(double target, DistributionKind input, double sigma_u2, double sigma_v2) {
  const double c3 = input == DistributionKind::GaussianWhite ? 3.0 * sigma_u2 : 1.8 * sigma_u2;
  const double c1 = 3.0 * (sigma_u2 + sigma_v2);
  if (!(c1 > 0.0)) throw InvalidArgument("invert_beta1: beta_1 is not strictly increasing (zero variances)");
  if (!std::isfinite(target)) throw InvalidArgument("invert_beta1: target is not finite");
  if (target == 0.0) return 0.0;

  auto g = [&](double x) { return (c3 * x * x + c1) * x - target; };
  auto dg = [&](double x) { return 3.0 * c3 * x * x + c1; };
  double lo = -1.0, hi = 1.0;
  while (g(lo) > 0.0) lo *= 2.0;
  while (g(hi) < 0.0) hi *= 2.0;

  double x = target / c1;
  if (x <= lo || x >= hi) x = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double gx = g(x);
    if (gx == 0.0) return x;
    if (gx < 0.0) lo = x; else hi = x;
    double next = x - gx / dg(x);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x))) return next;
    x = next;
  }
  return x;
}

EstimateReport zero_order_estimate(const DataRecord& data, const SystemSpec& spec_template) {
  require_cubic_example(spec_template);
  const BlaEstimate bla = estimate_weighting(data, fit_bla(data, {0}));
  const double su2 = spec_template.input_dist.variance;
  const double sv2 = spec_template.sigma_v2;
  const DistributionKind kind = spec_template.input_dist.kind;

  EstimateReport report;
  report.method = Method::II0;
  report.theta_hat = invert_beta1(bla.beta_hat[0], kind, su2, sv2);
  const double slope = kind == DistributionKind::GaussianWhite
                           ? beta_map_gaussian_derivative(report.theta_hat, su2, sv2)[0]
                           : beta_map_uniform_derivative(report.theta_hat, su2, sv2)[0];
  report.predicted_std = std::sqrt(bla.cov_beta(0, 0)) / std::abs(slope);
  report.notes = "beta1_hat=" + detail::format_double(bla.beta_hat[0]);
  return report;
}

IndirectReport first_order_estimate(const DataRecord& data, const SystemSpec& spec_template, bool weighted,
                                    const OptimizerSettings& settings) {
  require_cubic_example(spec_template);
  const BlaEstimate bla = estimate_weighting(data, fit_bla(data, {0, 1}));
  const double su2 = spec_template.input_dist.variance;
  const double sv2 = spec_template.sigma_v2;
  const BetaMap map = spec_template.input_dist.kind == DistributionKind::GaussianWhite
                          ? BetaMap::analytic_gaussian(su2, sv2)
                          : BetaMap::analytic_uniform(su2, sv2);
  if (weighted) return step2(bla, bla.W, Weighting::Sandwich, map, settings);
  return step2(bla, Eigen::MatrixXd::Identity(2, 2), Weighting::Identity, map, settings);
}

IndirectReport first_order_simulated_estimate(const DataRecord& data, const SystemSpec& spec_template,
                                              std::vector<double> sim_input, std::size_t S, Seed seed,
                                              const OptimizerSettings& settings) {
  const BlaEstimate bla = estimate_weighting(data, fit_bla(data, {0, 1}));
  auto sim = std::make_shared<const SimulatedBetaMap>(std::move(sim_input), data.history, spec_template, S, seed,
                                                      std::vector<int>{0, 1});
  return step2(bla, bla.W, Weighting::Sandwich, BetaMap::simulated(std::move(sim)), settings);
}

IndirectReport first_order_simulated_estimate(const DataRecord& data, const SystemSpec& spec_template,
                                              const std::vector<std::vector<double>>& sim_inputs, Seed seed,
                                              const OptimizerSettings& settings) {
  const BlaEstimate bla = estimate_weighting(data, fit_bla(data, {0, 1}));
  auto sim = std::make_shared<const SimulatedBetaMap>(sim_inputs, data.history, spec_template, seed,
                                                      std::vector<int>{0, 1});
  return step2(bla, bla.W, Weighting::Sandwich, BetaMap::simulated(std::move(sim)), settings);
}

EstimateReport to_estimate_report(const IndirectReport& r, Method method) {
  EstimateReport out;
  out.method = method;
  out.theta_hat = r.theta_hat;
  out.cost = r.min_value;
  out.iterations = r.iterations;
  out.evaluations = r.evaluations;
  out.degenerate = r.degenerate;
  if (r.predicted_cov.size() == 1 && r.predicted_cov(0, 0) >= 0.0) out.predicted_std = std::sqrt(r.predicted_cov(0, 0));
  return out;
}

}  // namespace wiener
