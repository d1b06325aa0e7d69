#pragma once

#include "demc/diagnostics.hpp"
#include "demc/fem.hpp"
#include "demc/posterior.hpp"
#include "demc/sampler.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace demc {

enum class Algorithm { demc, mh };

struct ModelSection {
  std::variant<fem::MassSpringModel, fem::BeamModel> model;
  std::size_t skip_modes = 0; // leading (rigid-body) modes not paired with measurements
  std::vector<std::string> parameter_names;
};

struct PriorSection {
  ParameterVector theta0;
  Eigen::VectorXd alpha;
  Bounds bounds;
};

struct LikelihoodSection {
  double beta_c = 10.0;
  std::size_t n_modes = 0;
  Eigen::VectorXd measured;              // resolved; synthesized when `synthetic`
  std::optional<ParameterVector> nominal; // known truth, for reporting
  bool synthetic = false;
};

struct SamplerSection {
  Algorithm algorithm = Algorithm::demc;
  std::size_t n_chains = 10;
  std::size_t n_generations = 0;
  double gamma = 0.0;
  Eigen::VectorXd jitter_sigma;
  std::uint64_t seed = 0;
  Eigen::VectorXd mh_step;
  std::size_t mh_samples = 0;
  ParameterVector initial;
  double max_failure_fraction = 0.5;
};

struct OutputSection {
  std::string directory = "run";
  Eigen::VectorXd scale; // divisor applied to ellipse exports
};

/// A fully resolved experiment: every default has been applied.
struct ExperimentConfig {
  std::string name;
  ModelSection model;
  PriorSection prior;
  LikelihoodSection likelihood;
  SamplerSection sampler;
  OutputSection output;

  std::size_t dimension() const { return static_cast<std::size_t>(prior.theta0.size()); }
};

/// Parses JSON text (comments allowed). Also accepts a run manifest, whose
/// "config" member is used. Throws ConfigError with the offending field.
ExperimentConfig parse_config(const std::string &text, const std::string &origin = "<config>");
ExperimentConfig load_config(const std::filesystem::path &path);

/// Fully resolved form; parse_config(to_json(c).dump()) reproduces c.
nlohmann::json to_json(const ExperimentConfig &config);
void write_config(const ExperimentConfig &config, const std::filesystem::path &path);

FrequencyFunction make_frequency_function(const ExperimentConfig &config);
PosteriorModel make_posterior(const ExperimentConfig &config);
DemcConfig make_demc_config(const ExperimentConfig &config);
MhConfig make_mh_config(const ExperimentConfig &config);

/// Runs the configured sampler without writing anything.
SampleTrace sample(const ExperimentConfig &config);

/// Summary document (parameters, frequencies, TAE, correlation) of a trace.
nlohmann::json summarize(const SampleTrace &trace, const ExperimentConfig &config);

struct RunArtifacts {
  std::filesystem::path directory;
  std::filesystem::path samples;
  std::filesystem::path summary;
  std::filesystem::path tae_trace;
  std::filesystem::path correlation;
  std::filesystem::path ellipses;
  std::filesystem::path manifest;
  nlohmann::json summary_json;
};

/// Samples, then writes every artifact into config.output.directory.
RunArtifacts run_experiment(const ExperimentConfig &config);

// ---------------------------------------------------------------------------
// File formats

/// `generation,chain,theta_1..theta_d,log_posterior,accepted`, %.16e numbers.
void write_samples_csv(const SampleTrace &trace, const std::filesystem::path &path);

/// Reads a samples file back; the header must have `dimension` theta columns.
/// Run metadata (algorithm, seed, gamma) comes from `config`.
SampleTrace read_samples_csv(const std::filesystem::path &path, const ExperimentConfig &config);

/// `generation,tae_percent`; missing points are written as `nan`.
std::string tae_trace_csv(const Eigen::VectorXd &tae_trace);

/// Writes `contents` to a temporary sibling and renames it over `path`.
void write_file_atomic(const std::filesystem::path &path, const std::string &contents);

} // namespace demc
