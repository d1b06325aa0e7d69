#pragma once

#include "demc/posterior.hpp"
#include "demc/types.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace demc {

using Rng = std::mt19937_64;

/// gamma = 2.38 / sqrt(2 d). Throws InvalidArgument for d = 0.
double default_gamma(std::size_t dimension);

struct ChainState {
  ParameterVector theta;
  double log_posterior = 0.0;
};

struct Population {
  std::vector<ChainState> chains;
  std::size_t generation = 0;

  std::size_t size() const { return chains.size(); }
  std::size_t dimension() const;
  /// N >= 3 and a common dimension.
  void validate() const;
};

struct DemcConfig {
  std::size_t n_chains = 10;
  std::size_t n_generations = 0;
  std::optional<double> gamma;         // default_gamma(d) when empty
  Eigen::VectorXd jitter_sigma;        // 1e-4 * (upper - lower) when empty
  std::uint64_t seed = 0;
  Bounds bounds;
  std::optional<ParameterVector> initial; // chain 0 start; posterior theta0 when empty
  double init_scatter = 0.05;             // chains 1..N-1: +-init_scatter * range
  /// Abort when more than this fraction of one generation's proposals fail
  /// to evaluate. 1.0 never aborts.
  double max_failure_fraction = 1.0;

  std::size_t dimension() const { return bounds.dimension(); }
  double resolved_gamma() const;
  Eigen::VectorXd resolved_jitter() const;
  void validate() const;
};

struct MhConfig {
  std::size_t n_samples = 0;
  Eigen::VectorXd step; // per-dimension std of the Gaussian random walk
  std::uint64_t seed = 0;
  ParameterVector initial;

  /// Step of `fraction` * (upper - lower) per component.
  static Eigen::VectorXd default_step(const Bounds &bounds, double fraction = 0.02);
  void validate() const;
};

struct TraceRecord {
  std::size_t generation = 0;
  std::size_t chain = 0;
  ParameterVector theta;
  double log_posterior = 0.0;
  bool accepted = false;
};

struct EvaluationWarning {
  std::size_t generation = 0;
  std::size_t chain = 0;
  std::string message;
};

/// Every chain state after every generation, in (generation, chain) order.
/// A rejected proposal repeats the current state.
struct SampleTrace {
  std::string algorithm; // "demc" or "mh"
  std::size_t n_chains = 0;
  std::size_t n_generations = 0;
  std::size_t dimension = 0;
  double gamma = 0.0; // 0 for mh
  std::uint64_t seed = 0;
  std::vector<TraceRecord> records;
  std::size_t evaluation_failures = 0;
  std::vector<EvaluationWarning> warnings; // first kMaxWarnings failures

  static constexpr std::size_t kMaxWarnings = 100;

  std::size_t accepted_count() const;
  /// records x dimension matrix of theta values.
  Eigen::MatrixXd samples() const;
};

/// theta* = theta_current + gamma (theta_a - theta_b) + jitter, unclipped.
/// Throws InvalidArgument when current, a and b are not three distinct chains.
ParameterVector demc_propose(const Population &population, std::size_t current,
                             std::size_t partner_a, std::size_t partner_b, double gamma,
                             const ParameterVector &jitter);

/// Metropolis test in log space: true iff u < min(1, exp(proposal - current)).
bool metropolis_accept(double log_post_proposal, double log_post_current, double uniform_draw);

struct GenerationOutcome {
  std::vector<bool> accepted;
  std::size_t failures = 0;
  std::vector<EvaluationWarning> warnings;
};

/// One DE-MC sweep over the chains in index order. Updates are applied in
/// place and are visible to later chains in the same sweep.
GenerationOutcome demc_generation(Population &population, const LogDensity &log_density,
                                  const DemcConfig &config, Rng &rng);

/// Chain 0 at the initial vector; the others scattered uniformly around it and
/// clipped to the bounds. Log densities are evaluated with kernels::evaluate_log_density.
Population initialize_population(const LogDensity &log_density, const DemcConfig &config,
                                 const ParameterVector &initial, Rng &rng);

SampleTrace run_demc(const LogDensity &log_density, const DemcConfig &config,
                     const ParameterVector &initial);
SampleTrace run_demc(const PosteriorModel &posterior, const DemcConfig &config);

/// Single-chain random-walk Metropolis with a symmetric Gaussian proposal.
SampleTrace run_mh(const LogDensity &log_density, const MhConfig &config);
SampleTrace run_mh(const PosteriorModel &posterior, MhConfig config);

} // namespace demc
