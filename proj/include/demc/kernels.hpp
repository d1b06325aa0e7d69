#pragma once

// Data-parallel kernels behind the sampler and the diagnostics. Each kernel
// has an OpenMP implementation in demc::kernels and a plain serial reference
// in demc::kernels::serial; the tests check that the two agree and the
// benchmark target times them against each other.
//
// Kernels never let exceptions escape a parallel region: failed evaluations
// are reported through NaN entries or per-item error messages.

#include "demc/types.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <string>
#include <vector>

namespace demc::kernels {

struct DensityBatch {
  Eigen::VectorXd values;
  std::vector<std::string> errors; // empty string where evaluation succeeded

  bool ok() const;
};

/// Column means of an n x d sample matrix.
Eigen::VectorXd column_means(const Eigen::MatrixXd &samples);

/// Unbiased (n - 1) sample covariance.
Eigen::MatrixXd covariance(const Eigen::MatrixXd &samples);

/// log_density at every row of `points`.
DensityBatch evaluate_log_density(const Eigen::MatrixXd &points, const LogDensity &log_density);

/// Forward model at every row; failed rows are filled with NaN.
Eigen::MatrixXd evaluate_frequencies(const Eigen::MatrixXd &points,
                                     const FrequencyFunction &frequencies, std::size_t n_modes);

/// Mean absolute relative error (percent) of the forward model at every row
/// against `measured`. NaN where the model fails.
Eigen::VectorXd tae_series(const Eigen::MatrixXd &points, const FrequencyFunction &frequencies,
                           const Eigen::VectorXd &measured);

/// Number of rows x with (x - center)^T precision (x - center) <= threshold.
std::size_t count_inside_ellipse(const Eigen::MatrixXd &points, const Eigen::Vector2d &center,
                                 const Eigen::Matrix2d &precision, double threshold);

/// Worker threads the OpenMP kernels will use (1 without OpenMP).
int thread_count();

namespace serial {

Eigen::VectorXd column_means(const Eigen::MatrixXd &samples);
Eigen::MatrixXd covariance(const Eigen::MatrixXd &samples);
DensityBatch evaluate_log_density(const Eigen::MatrixXd &points, const LogDensity &log_density);
Eigen::MatrixXd evaluate_frequencies(const Eigen::MatrixXd &points,
                                     const FrequencyFunction &frequencies, std::size_t n_modes);
Eigen::VectorXd tae_series(const Eigen::MatrixXd &points, const FrequencyFunction &frequencies,
                           const Eigen::VectorXd &measured);
std::size_t count_inside_ellipse(const Eigen::MatrixXd &points, const Eigen::Vector2d &center,
                                 const Eigen::Matrix2d &precision, double threshold);

} // namespace serial

} // namespace demc::kernels
