#include "demc/posterior.hpp"

#include "demc/error.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <utility>

namespace demc {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

void MeasuredModal::validate() const {
  if (frequencies.size() == 0)
    throw InvalidArgument("at least one measured frequency is required");
  for (Eigen::Index i = 0; i < frequencies.size(); ++i)
    if (!(frequencies[i] > 0.0) || !std::isfinite(frequencies[i]))
      throw InvalidArgument("measured frequency " + std::to_string(i + 1) +
                            " must be positive, got " + std::to_string(frequencies[i]));
}

PriorSpec PriorSpec::from_sigma(ParameterVector theta0, const Eigen::VectorXd &sigma,
                                Bounds bounds) {
  if (sigma.size() != theta0.size())
    throw InvalidArgument("prior sigma has " + std::to_string(sigma.size()) +
                          " components, theta0 has " + std::to_string(theta0.size()));
  if ((sigma.array() <= 0.0).any())
    throw InvalidArgument("prior sigma entries must be positive");
  return PriorSpec{std::move(theta0), sigma.array().square().inverse().matrix(),
                   std::move(bounds)};
}

void PriorSpec::validate() const {
  const auto q = theta0.size();
  if (q == 0)
    throw InvalidArgument("prior has zero dimension");
  if (alpha.size() != q || static_cast<Eigen::Index>(bounds.dimension()) != q ||
      bounds.upper.size() != q)
    throw InvalidArgument("prior theta0, alpha and bounds must share one dimension");
  for (Eigen::Index i = 0; i < q; ++i)
    if (!(alpha[i] > 0.0) || !std::isfinite(alpha[i]))
      throw InvalidArgument("prior alpha " + std::to_string(i + 1) + " must be positive");
  bounds.validate();
}

PosteriorModel::PosteriorModel(PriorSpec prior, LikelihoodSpec likelihood,
                               MeasuredModal measured, FrequencyFunction evaluator)
    : prior_(std::move(prior)), likelihood_(likelihood), measured_(std::move(measured)),
      evaluator_(std::move(evaluator)) {
  prior_.validate();
  measured_.validate();
  if (!(likelihood_.beta_c > 0.0) || !std::isfinite(likelihood_.beta_c))
    throw InvalidArgument("beta_c must be positive");
  if (!evaluator_)
    throw InvalidArgument("posterior model needs a frequency evaluator");
}

Eigen::VectorXd PosteriorModel::frequencies(const ParameterVector &theta) const {
  Eigen::VectorXd f = evaluator_(theta);
  if (static_cast<std::size_t>(f.size()) != measured_.size())
    throw EvaluationError("evaluator returned " + std::to_string(f.size()) +
                          " frequencies, " + std::to_string(measured_.size()) + " measured");
  return f;
}

LogDensity PosteriorModel::log_density() const {
  return [model = *this](const ParameterVector &theta) { return log_posterior(theta, model); };
}

double log_likelihood(const Eigen::VectorXd &analytical, const MeasuredModal &measured,
                      const LikelihoodSpec &likelihood) {
  if (analytical.size() != measured.frequencies.size())
    throw InvalidArgument("analytical and measured frequency counts differ");
  const double nm = static_cast<double>(measured.size());
  const double beta = likelihood.beta_c;
  const Eigen::ArrayXd fm = measured.frequencies.array();
  const double misfit = ((fm - analytical.array()) / fm).square().sum();
  return -0.5 * nm * std::log(kTwoPi / beta) - fm.log().sum() - 0.5 * beta * misfit;
}

double log_likelihood(const ParameterVector &theta, const PosteriorModel &model) {
  return log_likelihood(model.frequencies(theta), model.measured(), model.likelihood());
}

double log_prior(const ParameterVector &theta, const PriorSpec &prior) {
  if (theta.size() != prior.theta0.size())
    throw InvalidArgument("theta has " + std::to_string(theta.size()) +
                          " components, prior has " + std::to_string(prior.theta0.size()));
  if (!prior.bounds.contains(theta))
    return -std::numeric_limits<double>::infinity();
  const double q = static_cast<double>(theta.size());
  const double quad = (prior.alpha.array() * (theta - prior.theta0).array().square()).sum();
  return -0.5 * q * std::log(kTwoPi) + 0.5 * prior.alpha.array().log().sum() - 0.5 * quad;
}

double log_posterior(const ParameterVector &theta, const PosteriorModel &model) {
  const double lp = log_prior(theta, model.prior());
  if (lp == -std::numeric_limits<double>::infinity())
    return lp;
  return log_likelihood(theta, model) + lp;
}

double normalization_constant(const PosteriorModel &model) {
  const double nm = static_cast<double>(model.measured().size());
  const double q = static_cast<double>(model.dimension());
  const double beta = model.likelihood().beta_c;
  // Evaluated in log space; products of frequencies overflow quickly.
  const double log_z = 0.5 * nm * std::log(kTwoPi / beta) +
                       model.measured().frequencies.array().log().sum() +
                       0.5 * q * std::log(kTwoPi) - 0.5 * model.prior().alpha.array().log().sum();
  return std::exp(log_z);
}

} // namespace demc
