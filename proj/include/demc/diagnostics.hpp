#pragma once

#include "demc/posterior.hpp"
#include "demc/sampler.hpp"

#include <Eigen/Dense>

#include <cstddef>

namespace demc::diagnostics {

/// Componentwise mean over all records.
Eigen::VectorXd posterior_mean(const SampleTrace &trace);

/// Sample standard deviation (n - 1 denominator).
Eigen::VectorXd sample_std(const Eigen::MatrixXd &samples);

/// 100 * s_i / |mu_i|.
Eigen::VectorXd cov_percent(const Eigen::MatrixXd &samples);
Eigen::VectorXd cov_percent(const SampleTrace &trace);

/// Pearson correlation of the sample columns.
Eigen::MatrixXd correlation_matrix(const Eigen::MatrixXd &samples);
Eigen::MatrixXd correlation_matrix(const SampleTrace &trace);

/// Chi-square quantile with two degrees of freedom: -2 ln(1 - level).
double chi_square_2dof_quantile(double level);

struct Ellipse {
  Eigen::Vector2d center;
  double semi_major = 0.0;
  double semi_minor = 0.0;
  double angle = 0.0; // radians, leading eigenvector vs the first axis, in (-pi/2, pi/2]
  Eigen::Matrix2d covariance;
  double chi2 = 0.0;

  bool contains(const Eigen::Vector2d &point) const;
};

/// Gaussian confidence ellipse of an n x 2 sample cloud.
Ellipse confidence_ellipse(const Eigen::MatrixXd &samples2, double level = 0.95);
Ellipse confidence_ellipse(const SampleTrace &trace, std::size_t dim_i, std::size_t dim_j,
                           double level = 0.95);

/// Fraction of rows of an n x 2 matrix inside the ellipse.
double ellipse_coverage(const Ellipse &ellipse, const Eigen::MatrixXd &points2);

/// 100 |f^m - f| / f^m per mode.
Eigen::VectorXd relative_errors_percent(const Eigen::VectorXd &analytical,
                                        const Eigen::VectorXd &measured);

/// Total average error in percent.
double tae(const Eigen::VectorXd &analytical, const Eigen::VectorXd &measured);

/// Row g: mean of every record with generation <= g, all chains pooled.
Eigen::MatrixXd pooled_running_means(const SampleTrace &trace);

/// TAE of the forward model at each generation's pooled running mean.
/// Points where the model fails are NaN.
Eigen::VectorXd tae_trace(const SampleTrace &trace, const PosteriorModel &posterior);

struct SummaryStats {
  Eigen::VectorXd mean;
  Eigen::VectorXd std;
  Eigen::VectorXd cov_percent;
  Eigen::MatrixXd correlation;
};

SummaryStats summarize_parameters(const SampleTrace &trace);

struct FrequencySummary {
  Eigen::VectorXd at_mean;          // model at the posterior mean
  Eigen::VectorXd error_percent;    // at_mean vs measured
  double tae_percent = 0.0;
  Eigen::VectorXd sample_mean;      // mean of the model over the samples
  Eigen::VectorXd sample_cov_percent;
  std::size_t failed_samples = 0;   // samples whose forward model failed
};

FrequencySummary summarize_frequencies(const SampleTrace &trace, const PosteriorModel &posterior);

} // namespace demc::diagnostics
