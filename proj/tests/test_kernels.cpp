#include "demc/error.hpp"
#include "demc/kernels.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace demc;

namespace {

Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(1.0, 2.0);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i)
    m.data()[i] = z(rng);
  return m;
}

Eigen::VectorXd squares(const ParameterVector &t) {
  if (t[0] < -3.0)
    throw EvaluationError("no");
  return t.array().square().matrix();
}

} // namespace

TEST_CASE("parallel kernels agree with the serial reference") {
  const Eigen::MatrixXd x = random_matrix(5000, 6, 1);
  CHECK(kernels::column_means(x).isApprox(kernels::serial::column_means(x), 1e-12));
  CHECK(kernels::covariance(x).isApprox(kernels::serial::covariance(x), 1e-12));

  const LogDensity ld = [](const ParameterVector &t) {
    if (t[0] < -3.0)
      throw EvaluationError("bad point");
    return -0.5 * t.squaredNorm();
  };
  const kernels::DensityBatch a = kernels::evaluate_log_density(x, ld);
  const kernels::DensityBatch b = kernels::serial::evaluate_log_density(x, ld);
  bool values_match = a.values.size() == b.values.size();
  for (Eigen::Index i = 0; values_match && i < a.values.size(); ++i)
    values_match = (std::isnan(a.values[i]) && std::isnan(b.values[i])) || a.values[i] == b.values[i];
  CHECK(values_match);
  CHECK(a.errors == b.errors);
  CHECK_FALSE(a.ok());

  const Eigen::MatrixXd fa = kernels::evaluate_frequencies(x, squares, 6);
  const Eigen::MatrixXd fb = kernels::serial::evaluate_frequencies(x, squares, 6);
  CHECK(fa.array().isNaN().count() == fb.array().isNaN().count());
  CHECK(fa.array().isNaN().count() > 0);

  const Eigen::VectorXd meas = Eigen::VectorXd::Constant(6, 2.0);
  const Eigen::VectorXd ta = kernels::tae_series(x, squares, meas);
  const Eigen::VectorXd tb = kernels::serial::tae_series(x, squares, meas);
  bool same = true;
  for (Eigen::Index i = 0; i < ta.size(); ++i)
    same = same && ((std::isnan(ta[i]) && std::isnan(tb[i])) || ta[i] == tb[i]);
  CHECK(same);

  const Eigen::MatrixXd p2 = random_matrix(20000, 2, 2);
  const Eigen::Vector2d c(1.0, 1.0);
  const Eigen::Matrix2d prec = Eigen::Matrix2d::Identity() / 4.0;
  CHECK(kernels::count_inside_ellipse(p2, c, prec, 5.99) ==
        kernels::serial::count_inside_ellipse(p2, c, prec, 5.99));
  CHECK(kernels::thread_count() >= 1);
}

TEST_CASE("covariance matches the definition") {
  Eigen::MatrixXd x(3, 2);
  x << 1, 2, 3, 2, 5, 8;
  const Eigen::MatrixXd c = kernels::covariance(x);
  CHECK(c(0, 0) == doctest::Approx(4.0));
  CHECK(c(1, 1) == doctest::Approx(12.0));
  CHECK(c(0, 1) == doctest::Approx(6.0));
}
