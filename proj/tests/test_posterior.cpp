#include "demc/error.hpp"
#include "demc/posterior.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

using namespace demc;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Bounds box1(double lo, double hi) {
  return {Eigen::VectorXd::Constant(1, lo), Eigen::VectorXd::Constant(1, hi)};
}

PosteriorModel identity_model(double beta, double fm, double alpha) {
  PriorSpec prior{Eigen::VectorXd::Constant(1, fm), Eigen::VectorXd::Constant(1, alpha),
                  box1(0.0, 100.0)};
  return PosteriorModel(prior, LikelihoodSpec{beta}, MeasuredModal{Eigen::VectorXd::Constant(1, fm)},
                        [](const ParameterVector &t) { return Eigen::VectorXd(t); });
}

} // namespace

TEST_CASE("likelihood constants and residual term") {
  const MeasuredModal m{Eigen::VectorXd::Constant(1, 10.0)};
  const double base = -0.5 * std::log(kTwoPi / 10.0) - std::log(10.0);
  CHECK(log_likelihood(Eigen::VectorXd::Constant(1, 10.0), m, {10.0}) == doctest::Approx(base));
  CHECK(base == doctest::Approx(-2.07022).epsilon(1e-5));
  CHECK(log_likelihood(Eigen::VectorXd::Constant(1, 9.0), m, {10.0}) ==
        doctest::Approx(-2.12022).epsilon(1e-5));
  CHECK_THROWS(log_likelihood(Eigen::VectorXd::Constant(2, 9.0), m, {10.0}));
}

TEST_CASE("likelihood is pure") {
  const PosteriorModel pm = identity_model(10.0, 10.0, 1.0);
  const Eigen::VectorXd t = Eigen::VectorXd::Constant(1, 9.5);
  CHECK(log_likelihood(t, pm) == log_likelihood(t, pm));
}

TEST_CASE("prior values and truncation") {
  const PriorSpec p{Eigen::VectorXd::Constant(1, 0.0), Eigen::VectorXd::Constant(1, 1.0),
                    box1(-5.0, 5.0)};
  CHECK(log_prior(Eigen::VectorXd::Constant(1, 0.0), p) == doctest::Approx(-0.91894).epsilon(1e-5));
  CHECK(log_prior(Eigen::VectorXd::Constant(1, 1.0), p) == doctest::Approx(-1.41894).epsilon(1e-5));
  CHECK(log_prior(Eigen::VectorXd::Constant(1, 6.0), p) == -std::numeric_limits<double>::infinity());
  CHECK_THROWS(log_prior(Eigen::VectorXd::Constant(2, 0.0), p));
}

TEST_CASE("prior from sigma") {
  const PriorSpec p = PriorSpec::from_sigma(Eigen::VectorXd::Constant(1, 0.0),
                                            Eigen::VectorXd::Constant(1, 2.0), box1(-5, 5));
  CHECK(p.alpha[0] == doctest::Approx(0.25));
}

TEST_CASE("posterior is prior plus likelihood, -inf out of bounds") {
  int calls = 0;
  PriorSpec prior{Eigen::VectorXd::Constant(1, 10.0), Eigen::VectorXd::Constant(1, 1.0),
                  box1(1.0, 20.0)};
  const PosteriorModel pm(prior, {10.0}, MeasuredModal{Eigen::VectorXd::Constant(1, 10.0)},
                          [&calls](const ParameterVector &t) {
                            ++calls;
                            return Eigen::VectorXd(t);
                          });
  const Eigen::VectorXd t = Eigen::VectorXd::Constant(1, 9.0);
  CHECK(log_posterior(t, pm) == doctest::Approx(log_prior(t, pm.prior()) + log_likelihood(t, pm)));
  calls = 0;
  CHECK(log_posterior(Eigen::VectorXd::Constant(1, 30.0), pm) ==
        -std::numeric_limits<double>::infinity());
  CHECK(calls == 0);
}

TEST_CASE("evaluator failures surface as evaluation errors") {
  PriorSpec prior{Eigen::VectorXd::Constant(1, 10.0), Eigen::VectorXd::Constant(1, 1.0),
                  box1(1.0, 20.0)};
  const PosteriorModel wrong(prior, {10.0}, MeasuredModal{Eigen::VectorXd::Constant(1, 10.0)},
                             [](const ParameterVector &) { return Eigen::VectorXd(Eigen::Vector2d(1, 2)); });
  CHECK_THROWS_AS(wrong.frequencies(Eigen::VectorXd::Constant(1, 10.0)), EvaluationError);
}

TEST_CASE("invalid measured data is rejected at construction") {
  PriorSpec prior{Eigen::VectorXd::Constant(1, 10.0), Eigen::VectorXd::Constant(1, 1.0),
                  box1(1.0, 20.0)};
  auto id = [](const ParameterVector &t) { return Eigen::VectorXd(t); };
  CHECK_THROWS(PosteriorModel(prior, {10.0}, MeasuredModal{Eigen::VectorXd::Constant(1, 0.0)}, id));
  CHECK_THROWS(PosteriorModel(prior, {-1.0}, MeasuredModal{Eigen::VectorXd::Constant(1, 5.0)}, id));
}

TEST_CASE("normalization constant") {
  const PosteriorModel pm = [] {
    PriorSpec prior{Eigen::VectorXd::Constant(1, 1.0), Eigen::VectorXd::Constant(1, 1.0 / kTwoPi),
                    box1(0.0, 2.0)};
    return PosteriorModel(prior, {kTwoPi}, MeasuredModal{Eigen::VectorXd::Constant(1, 1.0)},
                          [](const ParameterVector &t) { return Eigen::VectorXd(t); });
  }();
  const double z = normalization_constant(pm);
  CHECK(z == doctest::Approx(kTwoPi).epsilon(1e-12));

  PriorSpec p4 = pm.prior();
  p4.alpha *= 4.0;
  const PosteriorModel pm4(p4, pm.likelihood(), pm.measured(),
                           [](const ParameterVector &t) { return Eigen::VectorXd(t); });
  CHECK(normalization_constant(pm4) == doctest::Approx(z / 2.0));
}
