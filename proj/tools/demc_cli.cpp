// demc_cli: run, summarize and trace model-updating experiments.
#include "demc/diagnostics.hpp"
#include "demc/error.hpp"
#include "demc/experiment.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kRuntimeError = 2;

int cmd_run(const std::string &config_path, std::optional<std::uint64_t> seed,
            std::optional<std::string> out) {
  demc::ExperimentConfig config = demc::load_config(config_path);
  if (seed)
    config.sampler.seed = *seed;
  if (out)
    config.output.directory = *out;
  const demc::RunArtifacts art = demc::run_experiment(config);
  const auto &s = art.summary_json;
  std::cout << "algorithm " << s["algorithm"].get<std::string>() << "  seed " << config.sampler.seed
            << "  acceptance " << s["acceptance_rate"].get<double>() << '\n';
  std::cout << "TAE initial " << s["tae_percent"]["initial"].get<double>() << "%  updated "
            << s["tae_percent"]["updated"].get<double>() << "%\n";
  for (const auto &p : s["parameters"]) {
    std::cout << "  " << p["name"].get<std::string>() << "  mean " << p["mean"].get<double>()
              << "  cov " << p["cov_percent"].get<double>() << '%';
    if (p.contains("error_percent"))
      std::cout << "  error " << p["error_percent"].get<double>() << '%';
    std::cout << '\n';
  }
  std::cout << "artifacts in " << art.directory.string() << '\n';
  return kOk;
}

int cmd_summarize(const std::string &samples, const std::string &config_path) {
  const demc::ExperimentConfig config = demc::load_config(config_path);
  const demc::SampleTrace trace = demc::read_samples_csv(samples, config);
  std::cout << demc::summarize(trace, config).dump(2) << '\n';
  return kOk;
}

int cmd_trace(const std::string &samples, const std::string &config_path) {
  const demc::ExperimentConfig config = demc::load_config(config_path);
  const demc::SampleTrace trace = demc::read_samples_csv(samples, config);
  std::cout << demc::tae_trace_csv(demc::diagnostics::tae_trace(trace, demc::make_posterior(config)));
  return kOk;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"DE-MC / Metropolis-Hastings finite element model updating"};
  app.require_subcommand(1);

  std::string config_path, samples_path;
  std::uint64_t seed = 0;
  std::string out_dir;

  auto *run = app.add_subcommand("run", "Sample the posterior and write all artifacts");
  run->add_option("--config", config_path, "Experiment config (JSON, comments allowed)")->required();
  auto *seed_opt = run->add_option("--seed", seed, "Override the sampler seed");
  auto *out_opt = run->add_option("--out", out_dir, "Override the output directory");

  auto *summ = app.add_subcommand("summarize", "Recompute the summary from a samples file");
  summ->add_option("--samples", samples_path)->required();
  summ->add_option("--config", config_path)->required();

  auto *trace = app.add_subcommand("trace", "Emit the TAE trace CSV for a samples file");
  trace->add_option("--samples", samples_path)->required();
  trace->add_option("--config", config_path)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  try {
    if (*run)
      return cmd_run(config_path, *seed_opt ? std::optional(seed) : std::nullopt,
                     *out_opt ? std::optional(out_dir) : std::nullopt);
    if (*summ)
      return cmd_summarize(samples_path, config_path);
    return cmd_trace(samples_path, config_path);
  } catch (const demc::ConfigError &e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
}
