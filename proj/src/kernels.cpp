#include "demc/kernels.hpp"

#include "demc/error.hpp"

#include <cmath>
#include <exception>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace demc::kernels {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require_rows(const Eigen::MatrixXd &samples, Eigen::Index min_rows, const char *what) {
  if (samples.rows() < min_rows)
    throw StatisticsError(std::string(what) + " needs at least " + std::to_string(min_rows) +
                          " samples, got " + std::to_string(samples.rows()));
}

double tae_percent(const Eigen::VectorXd &analytical, const Eigen::VectorXd &measured) {
  return 100.0 * ((measured - analytical).array().abs() / measured.array()).mean();
}

// Shared body for the per-row forward-model kernels.
Eigen::RowVectorXd frequencies_row(const FrequencyFunction &frequencies,
                                   const Eigen::MatrixXd &points, Eigen::Index r,
                                   std::size_t n_modes) {
  try {
    const Eigen::VectorXd f = frequencies(points.row(r).transpose());
    if (static_cast<std::size_t>(f.size()) == n_modes)
      return f.transpose();
  } catch (const std::exception &) {
  }
  return Eigen::RowVectorXd::Constant(static_cast<Eigen::Index>(n_modes), kNaN);
}

void density_row(const LogDensity &log_density, const Eigen::MatrixXd &points, Eigen::Index r,
                 DensityBatch &out) {
  try {
    out.values[r] = log_density(points.row(r).transpose());
  } catch (const std::exception &e) {
    out.values[r] = kNaN;
    out.errors[static_cast<std::size_t>(r)] = e.what();
  }
}

} // namespace

bool DensityBatch::ok() const {
  for (const std::string &e : errors)
    if (!e.empty())
      return false;
  return true;
}

int thread_count() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

// ---------------------------------------------------------------------------
// OpenMP

Eigen::VectorXd column_means(const Eigen::MatrixXd &samples) {
  require_rows(samples, 1, "mean");
  const Eigen::Index n = samples.rows();
  const Eigen::Index d = samples.cols();
  Eigen::VectorXd mean(d);
#pragma omp parallel for schedule(static)
  for (Eigen::Index j = 0; j < d; ++j) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      s += samples(i, j);
    mean[j] = s / static_cast<double>(n);
  }
  return mean;
}

Eigen::MatrixXd covariance(const Eigen::MatrixXd &samples) {
  require_rows(samples, 2, "covariance");
  const Eigen::Index n = samples.rows();
  const Eigen::Index d = samples.cols();
  const Eigen::VectorXd mean = column_means(samples);
  Eigen::MatrixXd cov(d, d);
  // Pairs (j, k) with k >= j, flattened so the loop balances across threads.
  const Eigen::Index pairs = d * (d + 1) / 2;
#pragma omp parallel for schedule(dynamic, 1)
  for (Eigen::Index p = 0; p < pairs; ++p) {
    Eigen::Index j = 0;
    Eigen::Index rem = p;
    while (rem >= d - j) {
      rem -= d - j;
      ++j;
    }
    const Eigen::Index k = j + rem;
    double s = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      s += (samples(i, j) - mean[j]) * (samples(i, k) - mean[k]);
    cov(j, k) = cov(k, j) = s / static_cast<double>(n - 1);
  }
  return cov;
}

DensityBatch evaluate_log_density(const Eigen::MatrixXd &points, const LogDensity &log_density) {
  const Eigen::Index n = points.rows();
  DensityBatch out{Eigen::VectorXd(n), std::vector<std::string>(static_cast<std::size_t>(n))};
#pragma omp parallel for schedule(dynamic, 1)
  for (Eigen::Index r = 0; r < n; ++r)
    density_row(log_density, points, r, out);
  return out;
}

Eigen::MatrixXd evaluate_frequencies(const Eigen::MatrixXd &points,
                                     const FrequencyFunction &frequencies, std::size_t n_modes) {
  const Eigen::Index n = points.rows();
  Eigen::MatrixXd out(n, static_cast<Eigen::Index>(n_modes));
#pragma omp parallel for schedule(dynamic, 64)
  for (Eigen::Index r = 0; r < n; ++r)
    out.row(r) = frequencies_row(frequencies, points, r, n_modes);
  return out;
}

Eigen::VectorXd tae_series(const Eigen::MatrixXd &points, const FrequencyFunction &frequencies,
                           const Eigen::VectorXd &measured) {
  const Eigen::Index n = points.rows();
  const auto n_modes = static_cast<std::size_t>(measured.size());
  Eigen::VectorXd out(n);
#pragma omp parallel for schedule(dynamic, 64)
  for (Eigen::Index r = 0; r < n; ++r) {
    const Eigen::VectorXd f = frequencies_row(frequencies, points, r, n_modes).transpose();
    out[r] = f.hasNaN() ? kNaN : tae_percent(f, measured);
  }
  return out;
}

std::size_t count_inside_ellipse(const Eigen::MatrixXd &points, const Eigen::Vector2d &center,
                                 const Eigen::Matrix2d &precision, double threshold) {
  const Eigen::Index n = points.rows();
  long long inside = 0;
#pragma omp parallel for schedule(static) reduction(+ : inside)
  for (Eigen::Index r = 0; r < n; ++r) {
    const Eigen::Vector2d dx = points.row(r).transpose() - center;
    if (dx.dot(precision * dx) <= threshold)
      ++inside;
  }
  return static_cast<std::size_t>(inside);
}

// ---------------------------------------------------------------------------
// Serial references

namespace serial {

Eigen::VectorXd column_means(const Eigen::MatrixXd &samples) {
  require_rows(samples, 1, "mean");
  return samples.colwise().mean().transpose();
}

Eigen::MatrixXd covariance(const Eigen::MatrixXd &samples) {
  require_rows(samples, 2, "covariance");
  const Eigen::MatrixXd centered = samples.rowwise() - samples.colwise().mean();
  return (centered.transpose() * centered) / static_cast<double>(samples.rows() - 1);
}

DensityBatch evaluate_log_density(const Eigen::MatrixXd &points, const LogDensity &log_density) {
  const Eigen::Index n = points.rows();
  DensityBatch out{Eigen::VectorXd(n), std::vector<std::string>(static_cast<std::size_t>(n))};
  for (Eigen::Index r = 0; r < n; ++r)
    density_row(log_density, points, r, out);
  return out;
}

Eigen::MatrixXd evaluate_frequencies(const Eigen::MatrixXd &points,
                                     const FrequencyFunction &frequencies, std::size_t n_modes) {
  Eigen::MatrixXd out(points.rows(), static_cast<Eigen::Index>(n_modes));
  for (Eigen::Index r = 0; r < points.rows(); ++r)
    out.row(r) = frequencies_row(frequencies, points, r, n_modes);
  return out;
}

Eigen::VectorXd tae_series(const Eigen::MatrixXd &points, const FrequencyFunction &frequencies,
                           const Eigen::VectorXd &measured) {
  const Eigen::MatrixXd f =
      evaluate_frequencies(points, frequencies, static_cast<std::size_t>(measured.size()));
  Eigen::VectorXd out(points.rows());
  for (Eigen::Index r = 0; r < points.rows(); ++r) {
    const Eigen::VectorXd fr = f.row(r).transpose();
    out[r] = fr.hasNaN() ? kNaN : tae_percent(fr, measured);
  }
  return out;
}

std::size_t count_inside_ellipse(const Eigen::MatrixXd &points, const Eigen::Vector2d &center,
                                 const Eigen::Matrix2d &precision, double threshold) {
  std::size_t inside = 0;
  for (Eigen::Index r = 0; r < points.rows(); ++r) {
    const Eigen::Vector2d dx = points.row(r).transpose() - center;
    if (dx.dot(precision * dx) <= threshold)
      ++inside;
  }
  return inside;
}

} // namespace serial

} // namespace demc::kernels
