#include "demc/diagnostics.hpp"

#include "demc/error.hpp"
#include "demc/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace demc::diagnostics {

namespace {

Eigen::MatrixXd checked_samples(const SampleTrace &trace) {
  if (trace.records.empty())
    throw StatisticsError("trace is empty");
  return trace.samples();
}

} // namespace

Eigen::VectorXd posterior_mean(const SampleTrace &trace) {
  return kernels::column_means(checked_samples(trace));
}

Eigen::VectorXd sample_std(const Eigen::MatrixXd &samples) {
  return kernels::covariance(samples).diagonal().cwiseSqrt();
}

Eigen::VectorXd cov_percent(const Eigen::MatrixXd &samples) {
  const Eigen::VectorXd mean = kernels::column_means(samples);
  const Eigen::VectorXd s = sample_std(samples);
  for (Eigen::Index i = 0; i < mean.size(); ++i)
    if (mean[i] == 0.0)
      throw StatisticsError("c.o.v undefined: component " + std::to_string(i + 1) +
                            " has zero mean");
  return 100.0 * s.array() / mean.array().abs();
}

Eigen::VectorXd cov_percent(const SampleTrace &trace) { return cov_percent(checked_samples(trace)); }

Eigen::MatrixXd correlation_matrix(const Eigen::MatrixXd &samples) {
  const Eigen::MatrixXd cov = kernels::covariance(samples);
  const Eigen::VectorXd s = cov.diagonal().cwiseSqrt();
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (!(s[i] > 0.0))
      throw StatisticsError("correlation undefined: component " + std::to_string(i + 1) +
                            " has zero variance");
  Eigen::MatrixXd r = cov.array() / (s * s.transpose()).array();
  r = r.cwiseMax(-1.0).cwiseMin(1.0);
  r.diagonal().setOnes();
  return r;
}

Eigen::MatrixXd correlation_matrix(const SampleTrace &trace) {
  return correlation_matrix(checked_samples(trace));
}

double chi_square_2dof_quantile(double level) {
  if (!(level > 0.0 && level < 1.0))
    throw InvalidArgument("confidence level must lie in (0, 1)");
  return -2.0 * std::log1p(-level);
}

bool Ellipse::contains(const Eigen::Vector2d &point) const {
  const Eigen::Vector2d dx = point - center;
  return dx.dot(covariance.inverse() * dx) <= chi2;
}

Ellipse confidence_ellipse(const Eigen::MatrixXd &samples2, double level) {
  if (samples2.cols() != 2)
    throw InvalidArgument("confidence_ellipse expects two columns");
  if (samples2.rows() < 3)
    throw StatisticsError("confidence_ellipse needs at least 3 samples");
  Ellipse e;
  e.chi2 = chi_square_2dof_quantile(level);
  e.center = kernels::column_means(samples2);
  e.covariance = kernels::covariance(samples2);

  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(e.covariance);
  const Eigen::Vector2d lambda = eig.eigenvalues(); // ascending
  if (!(lambda[0] > 1e-12 * std::abs(lambda[1])) || !(lambda[1] > 0.0))
    throw StatisticsError("degenerate ellipse: sample covariance is singular");
  e.semi_major = std::sqrt(e.chi2 * lambda[1]);
  e.semi_minor = std::sqrt(e.chi2 * lambda[0]);
  const Eigen::Vector2d v = eig.eigenvectors().col(1);
  double angle = std::atan2(v[1], v[0]);
  if (angle <= -std::numbers::pi / 2)
    angle += std::numbers::pi;
  else if (angle > std::numbers::pi / 2)
    angle -= std::numbers::pi;
  e.angle = angle;
  return e;
}

Ellipse confidence_ellipse(const SampleTrace &trace, std::size_t dim_i, std::size_t dim_j,
                           double level) {
  if (dim_i >= trace.dimension || dim_j >= trace.dimension || dim_i == dim_j)
    throw InvalidArgument("confidence_ellipse: invalid dimension pair");
  const Eigen::MatrixXd all = checked_samples(trace);
  Eigen::MatrixXd pair(all.rows(), 2);
  pair.col(0) = all.col(static_cast<Eigen::Index>(dim_i));
  pair.col(1) = all.col(static_cast<Eigen::Index>(dim_j));
  return confidence_ellipse(pair, level);
}

double ellipse_coverage(const Ellipse &ellipse, const Eigen::MatrixXd &points2) {
  if (points2.rows() == 0)
    throw StatisticsError("coverage of an empty point set");
  const std::size_t inside = kernels::count_inside_ellipse(points2, ellipse.center,
                                                           ellipse.covariance.inverse(), ellipse.chi2);
  return static_cast<double>(inside) / static_cast<double>(points2.rows());
}

Eigen::VectorXd relative_errors_percent(const Eigen::VectorXd &analytical,
                                        const Eigen::VectorXd &measured) {
  if (analytical.size() != measured.size())
    throw InvalidArgument("analytical and measured frequency counts differ");
  if (measured.size() == 0 || (measured.array() <= 0.0).any())
    throw InvalidArgument("measured frequencies must be positive");
  return 100.0 * (measured - analytical).array().abs() / measured.array();
}

double tae(const Eigen::VectorXd &analytical, const Eigen::VectorXd &measured) {
  return relative_errors_percent(analytical, measured).mean();
}

Eigen::MatrixXd pooled_running_means(const SampleTrace &trace) {
  if (trace.records.empty())
    throw StatisticsError("trace is empty");
  const auto d = static_cast<Eigen::Index>(trace.dimension);
  std::size_t n_gen = 0;
  for (const TraceRecord &r : trace.records)
    n_gen = std::max(n_gen, r.generation + 1);

  Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_gen), d);
  std::vector<double> counts(n_gen, 0.0);
  for (const TraceRecord &r : trace.records) {
    sums.row(static_cast<Eigen::Index>(r.generation)) += r.theta.transpose();
    counts[r.generation] += 1.0;
  }
  Eigen::RowVectorXd running = Eigen::RowVectorXd::Zero(d);
  double count = 0.0;
  Eigen::MatrixXd means(static_cast<Eigen::Index>(n_gen), d);
  for (std::size_t g = 0; g < n_gen; ++g) {
    running += sums.row(static_cast<Eigen::Index>(g));
    count += counts[g];
    means.row(static_cast<Eigen::Index>(g)) = running / count;
  }
  return means;
}

Eigen::VectorXd tae_trace(const SampleTrace &trace, const PosteriorModel &posterior) {
  const Eigen::MatrixXd means = pooled_running_means(trace);
  return kernels::tae_series(
      means, [&posterior](const ParameterVector &theta) { return posterior.frequencies(theta); },
      posterior.measured().frequencies);
}

SummaryStats summarize_parameters(const SampleTrace &trace) {
  const Eigen::MatrixXd samples = checked_samples(trace);
  SummaryStats s;
  s.mean = kernels::column_means(samples);
  s.std = sample_std(samples);
  s.cov_percent = cov_percent(samples);
  s.correlation = correlation_matrix(samples);
  return s;
}

FrequencySummary summarize_frequencies(const SampleTrace &trace, const PosteriorModel &posterior) {
  const Eigen::MatrixXd samples = checked_samples(trace);
  const Eigen::VectorXd &measured = posterior.measured().frequencies;
  const auto n_modes = static_cast<std::size_t>(measured.size());

  FrequencySummary out;
  out.at_mean = posterior.frequencies(kernels::column_means(samples));
  out.error_percent = relative_errors_percent(out.at_mean, measured);
  out.tae_percent = out.error_percent.mean();

  // A rejected proposal repeats its chain's state, so only states that
  // changed need a forward solve.
  std::vector<Eigen::Index> source(trace.records.size());
  std::vector<Eigen::Index> last_of_chain(trace.n_chains, -1);
  std::vector<Eigen::Index> unique_rows;
  for (std::size_t k = 0; k < trace.records.size(); ++k) {
    const TraceRecord &r = trace.records[k];
    Eigen::Index &last = last_of_chain[r.chain];
    if (last < 0 || r.accepted) {
      last = static_cast<Eigen::Index>(unique_rows.size());
      unique_rows.push_back(static_cast<Eigen::Index>(k));
    }
    source[k] = last;
  }
  Eigen::MatrixXd unique(static_cast<Eigen::Index>(unique_rows.size()), samples.cols());
  for (std::size_t u = 0; u < unique_rows.size(); ++u)
    unique.row(static_cast<Eigen::Index>(u)) = samples.row(unique_rows[u]);
  const Eigen::MatrixXd f_unique = kernels::evaluate_frequencies(
      unique, [&posterior](const ParameterVector &theta) { return posterior.frequencies(theta); },
      n_modes);

  std::vector<Eigen::Index> good;
  good.reserve(source.size());
  for (Eigen::Index src : source) {
    if (f_unique.row(src).hasNaN())
      ++out.failed_samples;
    else
      good.push_back(src);
  }
  if (good.size() < 2)
    throw StatisticsError("fewer than two samples have a valid forward model");
  Eigen::MatrixXd f(static_cast<Eigen::Index>(good.size()), static_cast<Eigen::Index>(n_modes));
  for (std::size_t k = 0; k < good.size(); ++k)
    f.row(static_cast<Eigen::Index>(k)) = f_unique.row(good[k]);
  out.sample_mean = kernels::column_means(f);
  out.sample_cov_percent = cov_percent(f);
  return out;
}

} // namespace demc::diagnostics
