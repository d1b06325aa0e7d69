#pragma once

#include "demc/types.hpp"

#include <Eigen/Dense>

#include <cstddef>

namespace demc {

/// Measured natural frequencies f_i^m in Hz, ascending, all positive.
struct MeasuredModal {
  Eigen::VectorXd frequencies;

  std::size_t size() const { return static_cast<std::size_t>(frequencies.size()); }
  void validate() const;
};

/// Independent Gaussian prior with precisions alpha_i, truncated to `bounds`.
struct PriorSpec {
  ParameterVector theta0;
  Eigen::VectorXd alpha; // 1 / sigma_i^2, units 1/theta_i^2
  Bounds bounds;

  static PriorSpec from_sigma(ParameterVector theta0, const Eigen::VectorXd &sigma, Bounds bounds);

  std::size_t dimension() const { return static_cast<std::size_t>(theta0.size()); }
  void validate() const;
};

struct LikelihoodSpec {
  double beta_c = 10.0; // precision of relative frequency errors
};

/// Prior + likelihood + forward model. Analytical and measured frequencies
/// are paired by ascending index.
class PosteriorModel {
public:
  PosteriorModel(PriorSpec prior, LikelihoodSpec likelihood, MeasuredModal measured,
                 FrequencyFunction evaluator);

  const PriorSpec &prior() const { return prior_; }
  const LikelihoodSpec &likelihood() const { return likelihood_; }
  const MeasuredModal &measured() const { return measured_; }
  std::size_t dimension() const { return prior_.dimension(); }

  /// Runs the forward model; throws EvaluationError if it fails or returns
  /// the wrong number of modes.
  Eigen::VectorXd frequencies(const ParameterVector &theta) const;

  /// log_posterior bound to this model, for the samplers.
  LogDensity log_density() const;

private:
  PriorSpec prior_;
  LikelihoodSpec likelihood_;
  MeasuredModal measured_;
  FrequencyFunction evaluator_;
};

/// Log of the frequency likelihood including its normalizing constants.
double log_likelihood(const Eigen::VectorXd &analytical, const MeasuredModal &measured,
                      const LikelihoodSpec &likelihood);
double log_likelihood(const ParameterVector &theta, const PosteriorModel &model);

/// Truncated Gaussian log prior; -infinity outside the bounds.
double log_prior(const ParameterVector &theta, const PriorSpec &prior);

/// log_likelihood + log_prior. Out-of-bounds theta returns -infinity without
/// running the forward model.
double log_posterior(const ParameterVector &theta, const PosteriorModel &model);

/// Z_s = (2pi/beta_c)^(N_m/2) prod f_i^m (2pi)^(Q/2) prod 1/sqrt(alpha_i).
/// Reporting only; the samplers never need it.
double normalization_constant(const PosteriorModel &model);

} // namespace demc
