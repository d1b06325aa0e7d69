// Serial reference vs OpenMP kernels.
#include "demc/experiment.hpp"
#include "demc/kernels.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace demc;

namespace {

Eigen::MatrixXd random_samples(Eigen::Index rows, Eigen::Index cols) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> z;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i)
    m.data()[i] = z(rng);
  return m;
}

const ExperimentConfig &beam() {
  static const ExperimentConfig c = load_config(DEMC_CONFIG_DIR "/beam.json");
  return c;
}

Eigen::MatrixXd beam_points(Eigen::Index n) {
  const ExperimentConfig &c = beam();
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-0.05, 0.05);
  Eigen::MatrixXd p(n, static_cast<Eigen::Index>(c.dimension()));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index k = 0; k < p.cols(); ++k)
      p(i, k) = c.prior.theta0[k] + u(rng) * c.prior.bounds.range()[k];
  return p;
}

template <bool Parallel> void BM_Covariance(benchmark::State &state) {
  const Eigen::MatrixXd x = random_samples(state.range(0), 6);
  for (auto _ : state)
    benchmark::DoNotOptimize(Parallel ? kernels::covariance(x) : kernels::serial::covariance(x));
}

template <bool Parallel> void BM_EllipseCount(benchmark::State &state) {
  const Eigen::MatrixXd x = random_samples(state.range(0), 2);
  const Eigen::Matrix2d prec = Eigen::Matrix2d::Identity();
  for (auto _ : state)
    benchmark::DoNotOptimize(
        Parallel ? kernels::count_inside_ellipse(x, Eigen::Vector2d::Zero(), prec, 5.99)
                 : kernels::serial::count_inside_ellipse(x, Eigen::Vector2d::Zero(), prec, 5.99));
}

template <bool Parallel> void BM_BeamTaeSeries(benchmark::State &state) {
  const Eigen::MatrixXd p = beam_points(state.range(0));
  const FrequencyFunction f = make_frequency_function(beam());
  const Eigen::VectorXd &m = beam().likelihood.measured;
  for (auto _ : state)
    benchmark::DoNotOptimize(Parallel ? kernels::tae_series(p, f, m)
                                      : kernels::serial::tae_series(p, f, m));
}

} // namespace

BENCHMARK(BM_Covariance<false>)->Arg(100000);
BENCHMARK(BM_Covariance<true>)->Arg(100000);
BENCHMARK(BM_EllipseCount<false>)->Arg(1000000);
BENCHMARK(BM_EllipseCount<true>)->Arg(1000000);
BENCHMARK(BM_BeamTaeSeries<false>)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BeamTaeSeries<true>)->Arg(2000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
