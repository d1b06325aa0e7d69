#include "demc/error.hpp"
#include "demc/experiment.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <unistd.h>

namespace demc {

namespace fs = std::filesystem;

namespace {

void append_double(std::string &out, double v) {
  char buf[40];
  const int n = std::snprintf(buf, sizeof buf, "%.16e", v);
  out.append(buf, static_cast<std::size_t>(n));
}

std::vector<std::string> split_csv_line(const std::string &line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ','))
    fields.push_back(field);
  if (!line.empty() && line.back() == ',')
    fields.emplace_back();
  return fields;
}

double parse_double(const std::string &s, const fs::path &path, std::size_t line) {
  errno = 0;
  char *end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size())
    throw Error(path.string() + ":" + std::to_string(line) + ": bad number '" + s + "'");
  return v;
}

std::size_t parse_index(const std::string &s, const fs::path &path, std::size_t line) {
  char *end = nullptr;
  const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
  if (s.empty() || end != s.c_str() + s.size() || s.front() == '-')
    throw Error(path.string() + ":" + std::to_string(line) + ": bad index '" + s + "'");
  return static_cast<std::size_t>(v);
}

} // namespace

void write_file_atomic(const fs::path &path, const std::string &contents) {
  if (path.has_parent_path())
    fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out)
      throw Error("cannot open " + tmp.string() + " for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out)
      throw Error("failed writing " + tmp.string());
  }
  fs::rename(tmp, path);
}

void write_samples_csv(const SampleTrace &trace, const fs::path &path) {
  std::string out;
  out.reserve(trace.records.size() * (trace.dimension + 2) * 24 + 64);
  out += "generation,chain";
  for (std::size_t k = 1; k <= trace.dimension; ++k)
    out += ",theta_" + std::to_string(k);
  out += ",log_posterior,accepted\n";
  for (const TraceRecord &r : trace.records) {
    out += std::to_string(r.generation);
    out += ',';
    out += std::to_string(r.chain);
    for (Eigen::Index k = 0; k < r.theta.size(); ++k) {
      out += ',';
      append_double(out, r.theta[k]);
    }
    out += ',';
    append_double(out, r.log_posterior);
    out += r.accepted ? ",1\n" : ",0\n";
  }
  write_file_atomic(path, out);
}

SampleTrace read_samples_csv(const fs::path &path, const ExperimentConfig &config) {
  std::ifstream in(path);
  if (!in)
    throw Error("cannot open samples file " + path.string());
  const std::size_t d = config.dimension();

  std::string line;
  if (!std::getline(in, line))
    throw Error("samples file " + path.string() + " is empty");
  const std::vector<std::string> header = split_csv_line(line);
  std::vector<std::string> expected = {"generation", "chain"};
  for (std::size_t k = 1; k <= d; ++k)
    expected.push_back("theta_" + std::to_string(k));
  expected.emplace_back("log_posterior");
  expected.emplace_back("accepted");
  if (header != expected)
    throw ConfigError("samples file " + path.string() + " does not match the config: expected " +
                      std::to_string(d) + " theta columns, header has " +
                      std::to_string(header.size() >= 4 ? header.size() - 4 : 0));

  SampleTrace trace;
  trace.algorithm = config.sampler.algorithm == Algorithm::demc ? "demc" : "mh";
  trace.dimension = d;
  trace.seed = config.sampler.seed;
  trace.gamma = config.sampler.algorithm == Algorithm::demc ? config.sampler.gamma : 0.0;

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty())
      continue;
    const std::vector<std::string> f = split_csv_line(line);
    if (f.size() != expected.size())
      throw Error(path.string() + ":" + std::to_string(line_no) + ": expected " +
                  std::to_string(expected.size()) + " fields, got " + std::to_string(f.size()));
    TraceRecord r;
    r.generation = parse_index(f[0], path, line_no);
    r.chain = parse_index(f[1], path, line_no);
    r.theta.resize(static_cast<Eigen::Index>(d));
    for (std::size_t k = 0; k < d; ++k)
      r.theta[static_cast<Eigen::Index>(k)] = parse_double(f[2 + k], path, line_no);
    r.log_posterior = parse_double(f[2 + d], path, line_no);
    r.accepted = parse_index(f[3 + d], path, line_no) != 0;
    trace.n_chains = std::max(trace.n_chains, r.chain + 1);
    trace.n_generations = std::max(trace.n_generations, r.generation + 1);
    trace.records.push_back(std::move(r));
  }
  if (trace.records.empty())
    throw Error("samples file " + path.string() + " has no records");
  return trace;
}

std::string tae_trace_csv(const Eigen::VectorXd &tae_trace) {
  std::string out = "generation,tae_percent\n";
  for (Eigen::Index g = 0; g < tae_trace.size(); ++g) {
    out += std::to_string(g);
    out += ',';
    if (std::isnan(tae_trace[g]))
      out += "nan";
    else
      append_double(out, tae_trace[g]);
    out += '\n';
  }
  return out;
}

} // namespace demc
