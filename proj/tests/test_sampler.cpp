#include "demc/error.hpp"
#include "demc/sampler.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace demc;

namespace {

Bounds box(std::size_t d, double lo, double hi) {
  return {Eigen::VectorXd::Constant(static_cast<Eigen::Index>(d), lo),
          Eigen::VectorXd::Constant(static_cast<Eigen::Index>(d), hi)};
}

double std_normal(const ParameterVector &t) { return -0.5 * t.squaredNorm(); }

Population population_of(std::initializer_list<Eigen::Vector2d> thetas) {
  Population p;
  for (const auto &t : thetas)
    p.chains.push_back({t, 0.0});
  return p;
}

} // namespace

TEST_CASE("default gamma") {
  CHECK(default_gamma(5) == doctest::Approx(2.38 / std::sqrt(10.0)).epsilon(1e-12));
  CHECK(default_gamma(5) == doctest::Approx(0.75262).epsilon(1e-5));
  CHECK(default_gamma(2) == doctest::Approx(1.19));
  CHECK(default_gamma(1) == doctest::Approx(1.682914).epsilon(1e-6));
  CHECK_THROWS_AS(default_gamma(0), InvalidArgument);
}

TEST_CASE("differential proposal arithmetic") {
  const Population p = population_of({{1, 1}, {2, 0}, {0, 0}});
  CHECK(demc_propose(p, 0, 1, 2, 0.5, Eigen::Vector2d::Zero()).isApprox(Eigen::Vector2d(2, 1)));
  CHECK(demc_propose(p, 0, 1, 2, 0.0, Eigen::Vector2d::Zero()) == p.chains[0].theta);
  const Population same = population_of({{1, 1}, {3, 3}, {3, 3}});
  CHECK(demc_propose(same, 0, 1, 2, 0.7, Eigen::Vector2d::Zero()) == same.chains[0].theta);
  CHECK_THROWS_AS(demc_propose(p, 0, 0, 2, 0.5, Eigen::Vector2d::Zero()), InvalidArgument);
  CHECK_THROWS_AS(demc_propose(p, 0, 1, 1, 0.5, Eigen::Vector2d::Zero()), InvalidArgument);
}

TEST_CASE("metropolis test") {
  const double ninf = -std::numeric_limits<double>::infinity();
  CHECK(metropolis_accept(1.0, 0.0, 0.999999));
  CHECK(metropolis_accept(0.0, 0.0, 0.5));
  CHECK_FALSE(metropolis_accept(ninf, 0.0, 0.0));
  CHECK_FALSE(metropolis_accept(ninf, 0.0, 0.5));
  CHECK(metropolis_accept(std::log(0.5), 0.0, 0.4));
  CHECK_FALSE(metropolis_accept(std::log(0.5), 0.0, 0.6));
  CHECK_THROWS(metropolis_accept(0.0, 0.0, 1.0));
}

TEST_CASE("flat target accepts every in-bounds proposal") {
  DemcConfig c;
  c.n_chains = 6;
  c.n_generations = 50;
  c.bounds = box(2, -1e100, 1e100);
  c.init_scatter = 0.0;
  c.jitter_sigma = Eigen::Vector2d::Ones();
  c.seed = 3;
  const SampleTrace t = run_demc([](const ParameterVector &) { return 0.0; }, c, Eigen::Vector2d(0, 0));
  CHECK(t.accepted_count() == t.records.size());
}

TEST_CASE("identical chains with zero jitter never move") {
  DemcConfig c;
  c.n_chains = 5;
  c.n_generations = 20;
  c.bounds = box(2, -10, 10);
  c.jitter_sigma = Eigen::Vector2d::Zero();
  c.init_scatter = 0.0;
  const SampleTrace t = run_demc(std_normal, c, Eigen::Vector2d(1, -2));
  for (const TraceRecord &r : t.records)
    CHECK(r.theta == Eigen::Vector2d(1, -2));
}

TEST_CASE("trace cardinality, bounds and determinism") {
  DemcConfig c;
  c.n_chains = 7;
  c.n_generations = 200;
  c.bounds = box(3, -0.5, 2.0);
  c.seed = 17;
  const SampleTrace a = run_demc(std_normal, c, Eigen::Vector3d(0.5, 0.5, 0.5));
  CHECK(a.records.size() == 7 * 200);
  for (const TraceRecord &r : a.records)
    CHECK(c.bounds.contains(r.theta));
  const SampleTrace b = run_demc(std_normal, c, Eigen::Vector3d(0.5, 0.5, 0.5));
  REQUIRE(a.records.size() == b.records.size());
  bool same = true;
  for (std::size_t i = 0; i < a.records.size(); ++i)
    same = same && a.records[i].theta == b.records[i].theta &&
           a.records[i].accepted == b.records[i].accepted;
  CHECK(same);
  c.seed = 18;
  const SampleTrace other = run_demc(std_normal, c, Eigen::Vector3d(0.5, 0.5, 0.5));
  CHECK_FALSE(other.records.back().theta == a.records.back().theta);
}

TEST_CASE("population too small") {
  DemcConfig c;
  c.n_chains = 2;
  c.n_generations = 10;
  c.bounds = box(1, -1, 1);
  CHECK_THROWS_AS(run_demc(std_normal, c, Eigen::VectorXd::Zero(1)), ConfigError);
}

TEST_CASE("2D standard normal recovered by DE-MC") {
  DemcConfig c;
  c.n_chains = 10;
  c.n_generations = 5000;
  c.bounds = box(2, -20, 20);
  c.seed = 42;
  const SampleTrace t = run_demc(std_normal, c, Eigen::Vector2d(1, 1));
  const Eigen::MatrixXd s = t.samples();
  const Eigen::Index burn = s.rows() / 5;
  const Eigen::VectorXd mean = s.bottomRows(s.rows() - burn).colwise().mean();
  CHECK(std::abs(mean[0]) < 0.05);
  CHECK(std::abs(mean[1]) < 0.05);
}

TEST_CASE("evaluation failures reject the proposal and are logged") {
  DemcConfig c;
  c.n_chains = 5;
  c.n_generations = 40;
  c.bounds = box(1, -10, 10);
  c.seed = 1;
  auto flaky = [](const ParameterVector &t) {
    if (t[0] > 0.5)
      throw EvaluationError("solver diverged");
    return std_normal(t);
  };
  const SampleTrace t = run_demc(flaky, c, Eigen::VectorXd::Zero(1));
  CHECK(t.evaluation_failures > 0);
  CHECK_FALSE(t.warnings.empty());
  for (const TraceRecord &r : t.records)
    CHECK(r.theta[0] <= 0.5);

  c.max_failure_fraction = 0.0;
  CHECK_THROWS_AS(run_demc(flaky, c, Eigen::VectorXd::Zero(1)), EvaluationError);
}

TEST_CASE("random-walk Metropolis") {
  MhConfig m;
  m.n_samples = 50000;
  m.step = Eigen::VectorXd::Constant(1, 1.0);
  m.seed = 9;
  m.initial = Eigen::VectorXd::Zero(1);
  const SampleTrace t = run_mh(std_normal, m);
  CHECK(t.records.size() == 50000);
  CHECK(t.n_chains == 1);
  const Eigen::VectorXd x = t.samples().col(0);
  const double var = (x.array() - x.mean()).square().sum() / static_cast<double>(x.size() - 1);
  CHECK(var == doctest::Approx(1.0).epsilon(0.1));

  const SampleTrace again = run_mh(std_normal, m);
  CHECK(again.records.back().theta == t.records.back().theta);

  m.step.setZero();
  m.n_samples = 100;
  for (const TraceRecord &r : run_mh(std_normal, m).records)
    CHECK(r.theta[0] == 0.0);

  m.step = Eigen::VectorXd::Constant(1, -1.0);
  CHECK_THROWS_AS(run_mh(std_normal, m), ConfigError);
}
