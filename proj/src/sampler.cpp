#include "demc/sampler.hpp"

#include "demc/error.hpp"
#include "demc/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

namespace demc {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kBelowOne = 0x1.fffffffffffffp-1;

// Proposal log density, or -inf with `failure` set when the model fails.
double evaluate(const LogDensity &log_density, const ParameterVector &theta, std::string &failure) {
  try {
    const double lp = log_density(theta);
    if (std::isnan(lp)) {
      failure = "log density is NaN";
      return kNegInf;
    }
    return lp;
  } catch (const EvaluationError &e) {
    failure = e.what();
    return kNegInf;
  }
}

void check_dimension(const Eigen::VectorXd &v, std::size_t d, const char *what) {
  if (static_cast<std::size_t>(v.size()) != d)
    throw ConfigError(std::string(what) + " has " + std::to_string(v.size()) +
                      " components, expected " + std::to_string(d));
}

} // namespace

double default_gamma(std::size_t dimension) {
  if (dimension == 0)
    throw InvalidArgument("default_gamma: dimension must be at least 1");
  return 2.38 / std::sqrt(2.0 * static_cast<double>(dimension));
}

std::size_t Population::dimension() const {
  return chains.empty() ? 0 : static_cast<std::size_t>(chains.front().theta.size());
}

void Population::validate() const {
  if (chains.size() < 3)
    throw InvalidArgument("population too small: DE-MC needs at least 3 chains, got " +
                          std::to_string(chains.size()));
  const std::size_t d = dimension();
  for (std::size_t i = 0; i < chains.size(); ++i)
    if (static_cast<std::size_t>(chains[i].theta.size()) != d || d == 0)
      throw InvalidArgument("chain " + std::to_string(i) + " has a different dimension");
}

double DemcConfig::resolved_gamma() const {
  return gamma ? *gamma : default_gamma(dimension());
}

Eigen::VectorXd DemcConfig::resolved_jitter() const {
  if (jitter_sigma.size() != 0)
    return jitter_sigma;
  return 1e-4 * bounds.range();
}

void DemcConfig::validate() const {
  if (n_chains < 3)
    throw ConfigError("population too small: DE-MC needs at least 3 chains, got " +
                      std::to_string(n_chains));
  if (n_generations == 0)
    throw ConfigError("n_generations must be at least 1");
  if (bounds.dimension() == 0)
    throw ConfigError("bounds have zero dimension");
  bounds.validate();
  if (gamma && (!(*gamma > 0.0) || !std::isfinite(*gamma)))
    throw ConfigError("gamma must be positive");
  if (jitter_sigma.size() != 0) {
    check_dimension(jitter_sigma, dimension(), "jitter_sigma");
    if ((jitter_sigma.array() < 0.0).any() || !jitter_sigma.allFinite())
      throw ConfigError("jitter_sigma entries must be nonnegative");
  }
  if (initial)
    check_dimension(*initial, dimension(), "initial state");
  if (!(init_scatter >= 0.0))
    throw ConfigError("init_scatter must be nonnegative");
  if (!(max_failure_fraction >= 0.0 && max_failure_fraction <= 1.0))
    throw ConfigError("max_failure_fraction must lie in [0, 1]");
}

Eigen::VectorXd MhConfig::default_step(const Bounds &bounds, double fraction) {
  return fraction * bounds.range();
}

void MhConfig::validate() const {
  if (n_samples == 0)
    throw ConfigError("M-H needs at least one sample");
  if (initial.size() == 0)
    throw ConfigError("M-H initial state is empty");
  check_dimension(step, static_cast<std::size_t>(initial.size()), "M-H step");
  // A zero step is allowed: the chain then never moves.
  if ((step.array() < 0.0).any() || !step.allFinite())
    throw ConfigError("M-H step sizes must be nonnegative and finite");
}

std::size_t SampleTrace::accepted_count() const {
  return static_cast<std::size_t>(
      std::count_if(records.begin(), records.end(), [](const TraceRecord &r) { return r.accepted; }));
}

Eigen::MatrixXd SampleTrace::samples() const {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(records.size()),
                      static_cast<Eigen::Index>(dimension));
  for (std::size_t i = 0; i < records.size(); ++i)
    out.row(static_cast<Eigen::Index>(i)) = records[i].theta.transpose();
  return out;
}

ParameterVector demc_propose(const Population &population, std::size_t current,
                             std::size_t partner_a, std::size_t partner_b, double gamma,
                             const ParameterVector &jitter) {
  const std::size_t n = population.size();
  if (current >= n || partner_a >= n || partner_b >= n)
    throw InvalidArgument("demc_propose: chain index out of range");
  if (current == partner_a || current == partner_b || partner_a == partner_b)
    throw InvalidArgument("demc_propose: current and partner chains must be distinct");
  const ParameterVector &ti = population.chains[current].theta;
  if (jitter.size() != ti.size())
    throw InvalidArgument("demc_propose: jitter dimension mismatch");
  return ti + gamma * (population.chains[partner_a].theta - population.chains[partner_b].theta) +
         jitter;
}

bool metropolis_accept(double log_post_proposal, double log_post_current, double uniform_draw) {
  if (!(log_post_current > kNegInf) || std::isnan(log_post_current))
    throw InvalidArgument("metropolis_accept: current state must have finite log posterior");
  if (!(uniform_draw >= 0.0 && uniform_draw < 1.0))
    throw InvalidArgument("metropolis_accept: uniform draw must lie in [0, 1)");
  if (std::isnan(log_post_proposal))
    return false;
  const double delta = log_post_proposal - log_post_current;
  if (delta >= 0.0)
    return true;
  // log(0) = -inf never beats a finite delta; a -inf delta is never beaten.
  return std::log(uniform_draw) < delta;
}

GenerationOutcome demc_generation(Population &population, const LogDensity &log_density,
                                  const DemcConfig &config, Rng &rng) {
  population.validate();
  const std::size_t n = population.size();
  const auto d = static_cast<Eigen::Index>(population.dimension());
  const double gamma = config.resolved_gamma();
  const Eigen::VectorXd sigma = config.resolved_jitter();
  if (sigma.size() != d)
    throw InvalidArgument("jitter dimension does not match the population");

  std::uniform_int_distribution<std::size_t> pick_a(0, n - 2);
  std::uniform_int_distribution<std::size_t> pick_b(0, n - 3);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  GenerationOutcome out;
  out.accepted.assign(n, false);
  ParameterVector jitter(d);
  for (std::size_t i = 0; i < n; ++i) {
    // a uniform over the others; b uniform over the remaining N - 2.
    std::size_t a = pick_a(rng);
    if (a >= i)
      ++a;
    std::size_t b = pick_b(rng);
    const std::size_t lo = std::min(i, a);
    const std::size_t hi = std::max(i, a);
    if (b >= lo)
      ++b;
    if (b >= hi)
      ++b;

    for (Eigen::Index k = 0; k < d; ++k)
      jitter[k] = sigma[k] * normal(rng);
    ParameterVector proposal = demc_propose(population, i, a, b, gamma, jitter);

    std::string failure;
    const double lp = config.bounds.contains(proposal) ? evaluate(log_density, proposal, failure)
                                                       : kNegInf;
    if (!failure.empty()) {
      ++out.failures;
      out.warnings.push_back({population.generation, i, failure});
    }
    const double u = std::min(uniform(rng), kBelowOne);
    if (metropolis_accept(lp, population.chains[i].log_posterior, u)) {
      population.chains[i].theta = std::move(proposal);
      population.chains[i].log_posterior = lp;
      out.accepted[i] = true;
    }
  }

  if (static_cast<double>(out.failures) > config.max_failure_fraction * static_cast<double>(n)) {
    std::ostringstream os;
    os << "generation " << population.generation << ": " << out.failures << " of " << n
       << " proposals failed to evaluate (first: " << out.warnings.front().message << ")";
    throw EvaluationError(os.str());
  }
  ++population.generation;
  return out;
}

Population initialize_population(const LogDensity &log_density, const DemcConfig &config,
                                 const ParameterVector &initial, Rng &rng) {
  config.validate();
  check_dimension(initial, config.dimension(), "initial state");
  if (!config.bounds.contains(initial))
    throw ConfigError("initial state lies outside the bounds");

  const auto n = static_cast<Eigen::Index>(config.n_chains);
  const auto d = static_cast<Eigen::Index>(config.dimension());
  const Eigen::VectorXd range = config.bounds.range();
  std::uniform_real_distribution<double> scatter(-config.init_scatter, config.init_scatter);

  Eigen::MatrixXd starts(n, d);
  starts.row(0) = initial.transpose();
  for (Eigen::Index c = 1; c < n; ++c)
    for (Eigen::Index k = 0; k < d; ++k)
      starts(c, k) = std::clamp(initial[k] + scatter(rng) * range[k], config.bounds.lower[k],
                                config.bounds.upper[k]);

  const kernels::DensityBatch batch = kernels::evaluate_log_density(starts, log_density);
  Population pop;
  pop.chains.resize(static_cast<std::size_t>(n));
  for (Eigen::Index c = 0; c < n; ++c) {
    const auto ci = static_cast<std::size_t>(c);
    if (!batch.errors[ci].empty())
      throw EvaluationError("initial chain " + std::to_string(c) +
                            " could not be evaluated: " + batch.errors[ci]);
    if (!std::isfinite(batch.values[c]))
      throw EvaluationError("initial chain " + std::to_string(c) +
                            " has a non-finite log posterior");
    pop.chains[ci] = {starts.row(c).transpose(), batch.values[c]};
  }
  return pop;
}

SampleTrace run_demc(const LogDensity &log_density, const DemcConfig &config,
                     const ParameterVector &initial) {
  config.validate();
  Rng rng(config.seed);
  Population pop = initialize_population(log_density, config, initial, rng);

  SampleTrace trace;
  trace.algorithm = "demc";
  trace.n_chains = config.n_chains;
  trace.n_generations = config.n_generations;
  trace.dimension = config.dimension();
  trace.gamma = config.resolved_gamma();
  trace.seed = config.seed;
  trace.records.reserve(config.n_chains * config.n_generations);

  for (std::size_t g = 0; g < config.n_generations; ++g) {
    GenerationOutcome out = demc_generation(pop, log_density, config, rng);
    trace.evaluation_failures += out.failures;
    for (EvaluationWarning &w : out.warnings)
      if (trace.warnings.size() < SampleTrace::kMaxWarnings)
        trace.warnings.push_back(std::move(w));
    for (std::size_t i = 0; i < pop.size(); ++i)
      trace.records.push_back(
          {g, i, pop.chains[i].theta, pop.chains[i].log_posterior, out.accepted[i]});
  }
  return trace;
}

SampleTrace run_demc(const PosteriorModel &posterior, const DemcConfig &config) {
  return run_demc(posterior.log_density(), config,
                  config.initial ? *config.initial : posterior.prior().theta0);
}

SampleTrace run_mh(const LogDensity &log_density, const MhConfig &config) {
  config.validate();
  Rng rng(config.seed);
  const Eigen::Index d = config.initial.size();

  ParameterVector current = config.initial;
  std::string failure;
  double current_lp = evaluate(log_density, current, failure);
  if (!failure.empty())
    throw EvaluationError("M-H initial state could not be evaluated: " + failure);
  if (!std::isfinite(current_lp))
    throw ConfigError("M-H initial state has zero posterior density");

  SampleTrace trace;
  trace.algorithm = "mh";
  trace.n_chains = 1;
  trace.n_generations = config.n_samples;
  trace.dimension = static_cast<std::size_t>(d);
  trace.seed = config.seed;
  trace.records.reserve(config.n_samples);

  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  ParameterVector proposal(d);
  for (std::size_t t = 0; t < config.n_samples; ++t) {
    for (Eigen::Index k = 0; k < d; ++k)
      proposal[k] = current[k] + config.step[k] * normal(rng);
    failure.clear();
    const double lp = evaluate(log_density, proposal, failure);
    if (!failure.empty()) {
      ++trace.evaluation_failures;
      if (trace.warnings.size() < SampleTrace::kMaxWarnings)
        trace.warnings.push_back({t, 0, failure});
    }
    const bool accepted = metropolis_accept(lp, current_lp, std::min(uniform(rng), kBelowOne));
    if (accepted) {
      current = proposal;
      current_lp = lp;
    }
    trace.records.push_back({t, 0, current, current_lp, accepted});
  }
  return trace;
}

SampleTrace run_mh(const PosteriorModel &posterior, MhConfig config) {
  if (config.initial.size() == 0)
    config.initial = posterior.prior().theta0;
  return run_mh(posterior.log_density(), config);
}

} // namespace demc
