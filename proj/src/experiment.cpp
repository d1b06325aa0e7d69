#include "demc/experiment.hpp"

#include "demc/error.hpp"
#include "demc/kernels.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace demc {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// Field access with path context for error messages.

[[noreturn]] void fail(const std::string &path, const std::string &what) {
  throw ConfigError(path + ": " + what);
}

const json &member(const json &obj, const std::string &key, const std::string &path) {
  if (!obj.is_object())
    fail(path, "expected an object");
  const auto it = obj.find(key);
  if (it == obj.end())
    fail(path + "." + key, "missing");
  return *it;
}

const json *optional_member(const json &obj, const std::string &key) {
  const auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

bool is_default(const json *j) { return j == nullptr || (j->is_string() && *j == "default"); }

double number(const json &j, const std::string &path) {
  if (!j.is_number())
    fail(path, "expected a number");
  return j.get<double>();
}

double positive(const json &j, const std::string &path) {
  const double v = number(j, path);
  if (!(v > 0.0) || !std::isfinite(v))
    fail(path, "must be positive");
  return v;
}

std::size_t count(const json &j, const std::string &path) {
  if (!j.is_number_integer() || j.get<long long>() < 0)
    fail(path, "expected a nonnegative integer");
  return j.get<std::size_t>();
}

std::string text(const json &j, const std::string &path) {
  if (!j.is_string())
    fail(path, "expected a string");
  return j.get<std::string>();
}

Eigen::VectorXd vector(const json &j, const std::string &path, std::size_t expected = 0) {
  if (!j.is_array())
    fail(path, "expected an array of numbers");
  if (expected != 0 && j.size() != expected)
    fail(path, "expected " + std::to_string(expected) + " entries, got " +
                   std::to_string(j.size()));
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i)
    v[static_cast<Eigen::Index>(i)] = number(j[i], path + "[" + std::to_string(i) + "]");
  return v;
}

json to_array(const Eigen::VectorXd &v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i)
    a.push_back(v[i]);
  return a;
}

// ---------------------------------------------------------------------------
// Model sections

ModelSection parse_mass_spring(const json &m, const std::string &path) {
  fem::MassSpringModel model;
  const Eigen::VectorXd masses = vector(member(m, "masses", path), path + ".masses");
  model.masses.assign(masses.data(), masses.data() + masses.size());

  std::map<std::string, std::size_t> by_name;
  const json &springs = member(m, "springs", path);
  if (!springs.is_array())
    fail(path + ".springs", "expected an array");
  for (std::size_t s = 0; s < springs.size(); ++s) {
    const std::string sp = path + ".springs[" + std::to_string(s) + "]";
    fem::Spring spring;
    spring.name = text(member(springs[s], "name", sp), sp + ".name");
    auto endpoint = [&](const char *key) {
      const json &e = member(springs[s], key, sp);
      if (e.is_string() && e == "ground")
        return fem::kGround;
      if (!e.is_number_integer())
        fail(sp + "." + key, "expected a DOF index or \"ground\"");
      return e.get<int>();
    };
    spring.a = endpoint("a");
    spring.b = endpoint("b");
    if (const json *k = optional_member(springs[s], "stiffness"))
      spring.stiffness = number(*k, sp + ".stiffness");
    if (!by_name.emplace(spring.name, s).second)
      fail(sp + ".name", "duplicate spring name '" + spring.name + "'");
    model.springs.push_back(spring);
  }

  ModelSection section;
  const json &params = member(m, "parameters", path);
  if (!params.is_array() || params.empty())
    fail(path + ".parameters", "expected a nonempty array of spring names");
  for (std::size_t p = 0; p < params.size(); ++p) {
    const std::string pp = path + ".parameters[" + std::to_string(p) + "]";
    const std::string name = text(params[p], pp);
    const auto it = by_name.find(name);
    if (it == by_name.end())
      fail(pp, "unknown spring '" + name + "'");
    model.parameter_map.push_back(it->second);
    section.parameter_names.push_back(name);
  }
  try {
    model.validate();
  } catch (const InvalidArgument &e) {
    fail(path, e.what());
  }
  section.model = std::move(model);
  return section;
}

ModelSection parse_beam(const json &m, const std::string &path) {
  fem::BeamModel model;
  model.n_nodes = static_cast<int>(count(member(m, "n_nodes", path), path + ".n_nodes"));

  std::map<std::string, std::size_t> by_name;
  const json &sections = member(m, "sections", path);
  if (!sections.is_array() || sections.empty())
    fail(path + ".sections", "expected a nonempty array");
  for (std::size_t s = 0; s < sections.size(); ++s) {
    const std::string sp = path + ".sections[" + std::to_string(s) + "]";
    const json &js = sections[s];
    fem::BeamSection sec;
    sec.name = text(member(js, "name", sp), sp + ".name");
    sec.youngs_modulus = positive(member(js, "E", sp), sp + ".E");
    sec.density = positive(member(js, "rho", sp), sp + ".rho");
    sec.inertia = positive(member(js, "I", sp), sp + ".I");
    sec.area = positive(member(js, "A", sp), sp + ".A");
    if (!by_name.emplace(sec.name, s).second)
      fail(sp + ".name", "duplicate section name '" + sec.name + "'");
    model.sections.push_back(sec);
  }
  auto section_index = [&](const json &j, const std::string &p) {
    const std::string name = text(j, p);
    const auto it = by_name.find(name);
    if (it == by_name.end())
      fail(p, "unknown section '" + name + "'");
    return it->second;
  };

  const json &elements = member(m, "elements", path);
  if (!elements.is_array() || elements.empty())
    fail(path + ".elements", "expected a nonempty array");
  for (std::size_t e = 0; e < elements.size(); ++e) {
    const std::string ep = path + ".elements[" + std::to_string(e) + "]";
    const json &nodes = member(elements[e], "nodes", ep);
    if (!nodes.is_array() || nodes.size() != 2 || !nodes[0].is_number_integer() ||
        !nodes[1].is_number_integer())
      fail(ep + ".nodes", "expected two node indices");
    fem::BeamElement el;
    el.node_a = nodes[0].get<int>();
    el.node_b = nodes[1].get<int>();
    el.length = positive(member(elements[e], "length", ep), ep + ".length");
    el.section = section_index(member(elements[e], "section", ep), ep + ".section");
    model.elements.push_back(el);
  }

  if (const json *cs = optional_member(m, "constraints")) {
    for (std::size_t c = 0; c < cs->size(); ++c) {
      const std::string cp = path + ".constraints[" + std::to_string(c) + "]";
      fem::NodeConstraint nc;
      nc.node = static_cast<int>(count(member((*cs)[c], "node", cp), cp + ".node"));
      const std::string dof = text(member((*cs)[c], "dof", cp), cp + ".dof");
      if (dof == "displacement")
        nc.dof = fem::NodeDof::displacement;
      else if (dof == "rotation")
        nc.dof = fem::NodeDof::rotation;
      else
        fail(cp + ".dof", "expected \"displacement\" or \"rotation\"");
      model.constraints.push_back(nc);
    }
  }
  if (const json *pms = optional_member(m, "point_masses")) {
    for (std::size_t k = 0; k < pms->size(); ++k) {
      const std::string kp = path + ".point_masses[" + std::to_string(k) + "]";
      fem::PointMass pm;
      pm.node = static_cast<int>(count(member((*pms)[k], "node", kp), kp + ".node"));
      pm.mass = positive(member((*pms)[k], "mass", kp), kp + ".mass");
      model.point_masses.push_back(pm);
    }
  }

  ModelSection section;
  const json &params = member(m, "parameters", path);
  if (!params.is_array() || params.empty())
    fail(path + ".parameters", "expected a nonempty array");
  for (std::size_t p = 0; p < params.size(); ++p) {
    const std::string pp = path + ".parameters[" + std::to_string(p) + "]";
    fem::BeamParameter bp;
    bp.section = section_index(member(params[p], "section", pp), pp + ".section");
    const std::string prop = text(member(params[p], "property", pp), pp + ".property");
    if (prop == "I")
      bp.property = fem::SectionProperty::inertia;
    else if (prop == "A")
      bp.property = fem::SectionProperty::area;
    else
      fail(pp + ".property", "expected \"I\" or \"A\"");
    model.parameter_map.push_back(bp);
    section.parameter_names.push_back(text(member(params[p], "name", pp), pp + ".name"));
  }
  try {
    model.validate();
  } catch (const InvalidArgument &e) {
    fail(path, e.what());
  }
  section.model = std::move(model);
  return section;
}

json model_to_json(const ModelSection &section) {
  json m;
  if (const auto *ms = std::get_if<fem::MassSpringModel>(&section.model)) {
    m["type"] = "mass_spring";
    m["masses"] = ms->masses;
    json springs = json::array();
    std::vector<bool> is_param(ms->springs.size(), false);
    for (std::size_t idx : ms->parameter_map)
      is_param[idx] = true;
    for (std::size_t s = 0; s < ms->springs.size(); ++s) {
      const fem::Spring &sp = ms->springs[s];
      json j{{"name", sp.name}};
      j["a"] = sp.a == fem::kGround ? json("ground") : json(sp.a);
      j["b"] = sp.b == fem::kGround ? json("ground") : json(sp.b);
      if (!is_param[s])
        j["stiffness"] = sp.stiffness;
      springs.push_back(j);
    }
    m["springs"] = springs;
    m["parameters"] = section.parameter_names;
  } else {
    const auto &bm = std::get<fem::BeamModel>(section.model);
    m["type"] = "beam";
    m["n_nodes"] = bm.n_nodes;
    json sections = json::array();
    for (const fem::BeamSection &s : bm.sections)
      sections.push_back({{"name", s.name}, {"E", s.youngs_modulus}, {"rho", s.density},
                          {"I", s.inertia}, {"A", s.area}});
    m["sections"] = sections;
    json elements = json::array();
    for (const fem::BeamElement &e : bm.elements)
      elements.push_back({{"nodes", {e.node_a, e.node_b}},
                          {"length", e.length},
                          {"section", bm.sections[e.section].name}});
    m["elements"] = elements;
    json constraints = json::array();
    for (const fem::NodeConstraint &c : bm.constraints)
      constraints.push_back(
          {{"node", c.node},
           {"dof", c.dof == fem::NodeDof::displacement ? "displacement" : "rotation"}});
    m["constraints"] = constraints;
    json masses = json::array();
    for (const fem::PointMass &pm : bm.point_masses)
      masses.push_back({{"node", pm.node}, {"mass", pm.mass}});
    m["point_masses"] = masses;
    json params = json::array();
    for (std::size_t p = 0; p < bm.parameter_map.size(); ++p)
      params.push_back(
          {{"name", section.parameter_names[p]},
           {"section", bm.sections[bm.parameter_map[p].section].name},
           {"property", bm.parameter_map[p].property == fem::SectionProperty::inertia ? "I" : "A"}});
    m["parameters"] = params;
  }
  m["skip_modes"] = section.skip_modes;
  return m;
}

std::size_t parameter_count(const ModelSection &section) {
  return section.parameter_names.size();
}

ExperimentConfig parse_document(const json &root) {
  if (!root.is_object())
    fail("config", "expected a JSON object at top level");
  ExperimentConfig c;
  c.name = root.contains("name") ? text(root["name"], "name") : "experiment";

  // model
  const json &m = member(root, "model", "config");
  const std::string type = text(member(m, "type", "model"), "model.type");
  if (type == "mass_spring")
    c.model = parse_mass_spring(m, "model");
  else if (type == "beam")
    c.model = parse_beam(m, "model");
  else
    fail("model.type", "unknown model type '" + type + "' (expected mass_spring or beam)");
  if (const json *s = optional_member(m, "skip_modes"))
    c.model.skip_modes = count(*s, "model.skip_modes");
  const std::size_t d = parameter_count(c.model);

  // prior
  const json &p = member(root, "prior", "config");
  c.prior.theta0 = vector(member(p, "theta0", "prior"), "prior.theta0", d);
  c.prior.bounds.lower = vector(member(p, "lower", "prior"), "prior.lower", d);
  c.prior.bounds.upper = vector(member(p, "upper", "prior"), "prior.upper", d);
  for (std::size_t i = 0; i < d; ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    if (!(c.prior.bounds.lower[k] < c.prior.bounds.upper[k]))
      fail("prior.lower[" + std::to_string(i) + "]",
           "bound ordering violated for component " + std::to_string(i + 1) + " (" +
               (i < c.model.parameter_names.size() ? c.model.parameter_names[i] : "") +
               "): lower must be below upper");
  }
  const int given = (p.contains("alpha") ? 1 : 0) + (p.contains("sigma") ? 1 : 0) +
                    (p.contains("sigma_fraction") ? 1 : 0);
  if (given > 1)
    fail("prior", "give at most one of alpha, sigma, sigma_fraction");
  if (p.contains("alpha")) {
    c.prior.alpha = vector(p["alpha"], "prior.alpha", d);
  } else {
    Eigen::VectorXd sigma;
    if (p.contains("sigma"))
      sigma = vector(p["sigma"], "prior.sigma", d);
    else {
      const double frac = p.contains("sigma_fraction")
                              ? positive(p["sigma_fraction"], "prior.sigma_fraction")
                              : 0.1;
      sigma = frac * c.prior.bounds.range();
    }
    if ((sigma.array() <= 0.0).any())
      fail("prior.sigma", "entries must be positive");
    c.prior.alpha = sigma.array().square().inverse().matrix();
  }
  if ((c.prior.alpha.array() <= 0.0).any() || !c.prior.alpha.allFinite())
    fail("prior.alpha", "entries must be positive");
  if (!c.prior.bounds.contains(c.prior.theta0))
    fail("prior.theta0", "lies outside the bounds");

  // likelihood
  const json &l = member(root, "likelihood", "config");
  c.likelihood.beta_c = l.contains("beta_c") ? positive(l["beta_c"], "likelihood.beta_c") : 10.0;
  c.likelihood.n_modes = count(member(l, "n_modes", "likelihood"), "likelihood.n_modes");
  if (c.likelihood.n_modes == 0)
    fail("likelihood.n_modes", "must be at least 1");
  if (const json *nom = optional_member(l, "nominal"))
    c.likelihood.nominal = vector(*nom, "likelihood.nominal", d);
  const json *syn = optional_member(l, "synthetic");
  const json *meas = optional_member(l, "measured");
  if ((syn == nullptr) == (meas == nullptr))
    fail("likelihood", "give exactly one of measured or synthetic");
  if (syn) {
    c.likelihood.synthetic = true;
    c.likelihood.nominal = vector(member(*syn, "nominal", "likelihood.synthetic"),
                                  "likelihood.synthetic.nominal", d);
    try {
      c.likelihood.measured = make_frequency_function(c)(*c.likelihood.nominal);
    } catch (const Error &e) {
      fail("likelihood.synthetic.nominal", std::string("forward model failed: ") + e.what());
    }
  } else {
    c.likelihood.measured = vector(*meas, "likelihood.measured", c.likelihood.n_modes);
    for (Eigen::Index i = 0; i < c.likelihood.measured.size(); ++i)
      if (!(c.likelihood.measured[i] > 0.0))
        fail("likelihood.measured[" + std::to_string(i) + "]", "must be positive");
  }

  // sampler
  const json &s = member(root, "sampler", "config");
  const std::string algo = s.contains("algorithm") ? text(s["algorithm"], "sampler.algorithm") : "demc";
  if (algo == "demc")
    c.sampler.algorithm = Algorithm::demc;
  else if (algo == "mh")
    c.sampler.algorithm = Algorithm::mh;
  else
    fail("sampler.algorithm", "expected \"demc\" or \"mh\"");
  if (s.contains("n_chains"))
    c.sampler.n_chains = count(s["n_chains"], "sampler.n_chains");
  if (c.sampler.n_chains < 3)
    fail("sampler.n_chains", "population too small: DE-MC needs at least 3 chains");
  c.sampler.n_generations = count(member(s, "n_generations", "sampler"), "sampler.n_generations");
  if (c.sampler.n_generations == 0)
    fail("sampler.n_generations", "must be at least 1");
  c.sampler.gamma = is_default(optional_member(s, "gamma")) ? default_gamma(d)
                                                             : positive(s["gamma"], "sampler.gamma");
  c.sampler.jitter_sigma = is_default(optional_member(s, "jitter_sigma"))
                               ? Eigen::VectorXd(1e-4 * c.prior.bounds.range())
                               : vector(s["jitter_sigma"], "sampler.jitter_sigma", d);
  if ((c.sampler.jitter_sigma.array() < 0.0).any())
    fail("sampler.jitter_sigma", "entries must be nonnegative");
  if (const json *seed = optional_member(s, "seed")) {
    if (!seed->is_number_unsigned() && !(seed->is_number_integer() && seed->get<long long>() >= 0))
      fail("sampler.seed", "expected an unsigned 64-bit integer");
    c.sampler.seed = seed->get<std::uint64_t>();
  }
  c.sampler.mh_step = is_default(optional_member(s, "mh_step"))
                          ? MhConfig::default_step(c.prior.bounds)
                          : vector(s["mh_step"], "sampler.mh_step", d);
  if ((c.sampler.mh_step.array() < 0.0).any())
    fail("sampler.mh_step", "step sizes must be nonnegative");
  // Equal posterior-evaluation budget with the DE-MC run by default.
  c.sampler.mh_samples = is_default(optional_member(s, "mh_samples"))
                             ? c.sampler.n_chains * c.sampler.n_generations
                             : count(s["mh_samples"], "sampler.mh_samples");
  if (c.sampler.mh_samples == 0)
    fail("sampler.mh_samples", "must be at least 1");
  c.sampler.initial = is_default(optional_member(s, "initial"))
                          ? c.prior.theta0
                          : vector(s["initial"], "sampler.initial", d);
  if (!c.prior.bounds.contains(c.sampler.initial))
    fail("sampler.initial", "lies outside the bounds");
  if (const json *f = optional_member(s, "max_failure_fraction")) {
    c.sampler.max_failure_fraction = number(*f, "sampler.max_failure_fraction");
    if (!(c.sampler.max_failure_fraction >= 0.0 && c.sampler.max_failure_fraction <= 1.0))
      fail("sampler.max_failure_fraction", "must lie in [0, 1]");
  }

  // output
  c.output.scale = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(d));
  if (const json *o = optional_member(root, "output")) {
    if (const json *dir = optional_member(*o, "directory"))
      c.output.directory = text(*dir, "output.directory");
    if (const json *sc = optional_member(*o, "scale")) {
      c.output.scale = vector(*sc, "output.scale", d);
      if ((c.output.scale.array() <= 0.0).any())
        fail("output.scale", "entries must be positive");
    }
  }
  return c;
}

} // namespace

ExperimentConfig parse_config(const std::string &text_in, const std::string &origin) {
  json root;
  try {
    root = json::parse(text_in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error &e) {
    throw ConfigError(origin + ": parse error: " + e.what());
  }
  // A run manifest carries the resolved config.
  if (root.is_object() && root.contains("config") && root["config"].is_object())
    root = root["config"];
  try {
    return parse_document(root);
  } catch (const ConfigError &e) {
    throw ConfigError(origin + ": " + e.what());
  } catch (const json::exception &e) {
    throw ConfigError(origin + ": " + e.what());
  }
}

ExperimentConfig load_config(const fs::path &path) {
  std::ifstream in(path);
  if (!in)
    throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string());
}

json to_json(const ExperimentConfig &c) {
  json root;
  root["name"] = c.name;
  root["model"] = model_to_json(c.model);
  root["prior"] = {{"theta0", to_array(c.prior.theta0)},
                   {"alpha", to_array(c.prior.alpha)},
                   {"lower", to_array(c.prior.bounds.lower)},
                   {"upper", to_array(c.prior.bounds.upper)}};
  json l = {{"beta_c", c.likelihood.beta_c}, {"n_modes", c.likelihood.n_modes}};
  if (c.likelihood.synthetic) {
    l["synthetic"] = {{"nominal", to_array(*c.likelihood.nominal)}};
  } else {
    l["measured"] = to_array(c.likelihood.measured);
    if (c.likelihood.nominal)
      l["nominal"] = to_array(*c.likelihood.nominal);
  }
  root["likelihood"] = l;
  root["sampler"] = {{"algorithm", c.sampler.algorithm == Algorithm::demc ? "demc" : "mh"},
                     {"n_chains", c.sampler.n_chains},
                     {"n_generations", c.sampler.n_generations},
                     {"gamma", c.sampler.gamma},
                     {"jitter_sigma", to_array(c.sampler.jitter_sigma)},
                     {"seed", c.sampler.seed},
                     {"mh_step", to_array(c.sampler.mh_step)},
                     {"mh_samples", c.sampler.mh_samples},
                     {"initial", to_array(c.sampler.initial)},
                     {"max_failure_fraction", c.sampler.max_failure_fraction}};
  root["output"] = {{"directory", c.output.directory}, {"scale", to_array(c.output.scale)}};
  return root;
}

void write_config(const ExperimentConfig &config, const fs::path &path) {
  write_file_atomic(path, to_json(config).dump(2) + "\n");
}

FrequencyFunction make_frequency_function(const ExperimentConfig &config) {
  return std::visit(
      [&](const auto &model) {
        return fem::make_frequency_function(model, config.likelihood.n_modes,
                                            config.model.skip_modes);
      },
      config.model.model);
}

PosteriorModel make_posterior(const ExperimentConfig &config) {
  return PosteriorModel(PriorSpec{config.prior.theta0, config.prior.alpha, config.prior.bounds},
                        LikelihoodSpec{config.likelihood.beta_c},
                        MeasuredModal{config.likelihood.measured},
                        make_frequency_function(config));
}

DemcConfig make_demc_config(const ExperimentConfig &config) {
  DemcConfig dc;
  dc.n_chains = config.sampler.n_chains;
  dc.n_generations = config.sampler.n_generations;
  dc.gamma = config.sampler.gamma;
  dc.jitter_sigma = config.sampler.jitter_sigma;
  dc.seed = config.sampler.seed;
  dc.bounds = config.prior.bounds;
  dc.initial = config.sampler.initial;
  dc.max_failure_fraction = config.sampler.max_failure_fraction;
  return dc;
}

MhConfig make_mh_config(const ExperimentConfig &config) {
  MhConfig mc;
  mc.n_samples = config.sampler.mh_samples;
  mc.step = config.sampler.mh_step;
  mc.seed = config.sampler.seed;
  mc.initial = config.sampler.initial;
  return mc;
}

SampleTrace sample(const ExperimentConfig &config) {
  const PosteriorModel posterior = make_posterior(config);
  if (config.sampler.algorithm == Algorithm::demc)
    return run_demc(posterior, make_demc_config(config));
  return run_mh(posterior, make_mh_config(config));
}

json summarize(const SampleTrace &trace, const ExperimentConfig &config) {
  if (trace.dimension != config.dimension())
    throw ConfigError("trace dimension " + std::to_string(trace.dimension) +
                      " does not match config dimension " + std::to_string(config.dimension()));
  const PosteriorModel posterior = make_posterior(config);
  const diagnostics::SummaryStats stats = diagnostics::summarize_parameters(trace);
  const diagnostics::FrequencySummary freq = diagnostics::summarize_frequencies(trace, posterior);
  const Eigen::VectorXd &measured = config.likelihood.measured;
  const Eigen::VectorXd f_initial = posterior.frequencies(config.sampler.initial);
  const Eigen::VectorXd init_err = diagnostics::relative_errors_percent(f_initial, measured);

  json doc;
  doc["name"] = config.name;
  doc["algorithm"] = trace.algorithm;
  doc["seed"] = trace.seed;
  doc["chains"] = trace.n_chains;
  doc["generations"] = trace.n_generations;
  doc["records"] = trace.records.size();
  doc["acceptance_rate"] =
      static_cast<double>(trace.accepted_count()) / static_cast<double>(trace.records.size());

  json params = json::array();
  for (std::size_t i = 0; i < config.dimension(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    json p = {{"name", config.model.parameter_names[i]},
              {"initial", config.sampler.initial[k]},
              {"mean", stats.mean[k]},
              {"std", stats.std[k]},
              {"cov_percent", stats.cov_percent[k]}};
    if (config.likelihood.nominal) {
      const double nom = (*config.likelihood.nominal)[k];
      p["nominal"] = nom;
      p["initial_error_percent"] = 100.0 * std::abs(config.sampler.initial[k] - nom) / std::abs(nom);
      p["error_percent"] = 100.0 * std::abs(stats.mean[k] - nom) / std::abs(nom);
    }
    params.push_back(p);
  }
  doc["parameters"] = params;

  json modes = json::array();
  for (Eigen::Index i = 0; i < measured.size(); ++i)
    modes.push_back({{"mode", i + 1},
                     {"measured", measured[i]},
                     {"initial", f_initial[i]},
                     {"initial_error_percent", init_err[i]},
                     {"updated", freq.at_mean[i]},
                     {"error_percent", freq.error_percent[i]},
                     {"sample_mean", freq.sample_mean[i]},
                     {"cov_percent", freq.sample_cov_percent[i]}});
  doc["frequencies"] = modes;
  doc["tae_percent"] = {{"initial", init_err.mean()}, {"updated", freq.tae_percent}};
  doc["mean_parameter_cov_percent"] = stats.cov_percent.mean();
  json corr = json::array();
  for (Eigen::Index r = 0; r < stats.correlation.rows(); ++r)
    corr.push_back(to_array(stats.correlation.row(r).transpose()));
  doc["correlation"] = corr;
  doc["failed_frequency_samples"] = freq.failed_samples;
  return doc;
}

RunArtifacts run_experiment(const ExperimentConfig &config) {
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  const SampleTrace trace = sample(config);
  const auto t1 = clock::now();

  RunArtifacts art;
  art.directory = config.output.directory;
  fs::create_directories(art.directory);
  art.samples = art.directory / "samples.csv";
  art.summary = art.directory / "summary.json";
  art.tae_trace = art.directory / "tae_trace.csv";
  art.correlation = art.directory / "correlation.csv";
  art.ellipses = art.directory / "ellipses.csv";
  art.manifest = art.directory / "manifest.json";

  write_samples_csv(trace, art.samples);
  art.summary_json = summarize(trace, config);
  write_file_atomic(art.summary, art.summary_json.dump(2) + "\n");

  const PosteriorModel posterior = make_posterior(config);
  write_file_atomic(art.tae_trace, tae_trace_csv(diagnostics::tae_trace(trace, posterior)));

  const std::vector<std::string> &names = config.model.parameter_names;
  std::ostringstream corr;
  corr.precision(17);
  corr << "parameter";
  for (const std::string &n : names)
    corr << ',' << n;
  corr << '\n';
  const json &cm = art.summary_json["correlation"];
  for (std::size_t r = 0; r < names.size(); ++r) {
    corr << names[r];
    for (std::size_t c = 0; c < names.size(); ++c)
      corr << ',' << cm[r][c].get<double>();
    corr << '\n';
  }
  write_file_atomic(art.correlation, corr.str());

  // Ellipses in normalized units (parameters divided by output.scale).
  Eigen::MatrixXd scaled = trace.samples();
  for (Eigen::Index k = 0; k < scaled.cols(); ++k)
    scaled.col(k) /= config.output.scale[k];
  std::ostringstream ell;
  ell.precision(17);
  ell << "param_i,param_j,center_i,center_j,semi_major,semi_minor,angle_rad,coverage\n";
  for (Eigen::Index i = 0; i < scaled.cols(); ++i) {
    for (Eigen::Index j = i + 1; j < scaled.cols(); ++j) {
      Eigen::MatrixXd pair(scaled.rows(), 2);
      pair.col(0) = scaled.col(i);
      pair.col(1) = scaled.col(j);
      ell << names[static_cast<std::size_t>(i)] << ',' << names[static_cast<std::size_t>(j)];
      try {
        const diagnostics::Ellipse e = diagnostics::confidence_ellipse(pair);
        ell << ',' << e.center[0] << ',' << e.center[1] << ',' << e.semi_major << ','
            << e.semi_minor << ',' << e.angle << ',' << diagnostics::ellipse_coverage(e, pair);
      } catch (const StatisticsError &) {
        ell << ",nan,nan,nan,nan,nan,nan";
      }
      ell << '\n';
    }
  }
  write_file_atomic(art.ellipses, ell.str());
  const auto t2 = clock::now();

  json manifest;
  manifest["config"] = to_json(config);
  manifest["seed"] = config.sampler.seed;
  manifest["algorithm"] = trace.algorithm;
  manifest["records"] = trace.records.size();
  manifest["evaluation_failures"] = trace.evaluation_failures;
  json warnings = json::array();
  for (const EvaluationWarning &w : trace.warnings)
    warnings.push_back({{"generation", w.generation}, {"chain", w.chain}, {"message", w.message}});
  manifest["warnings"] = warnings;
  manifest["threads"] = kernels::thread_count();
  manifest["timings_seconds"] = {
      {"sampling", std::chrono::duration<double>(t1 - t0).count()},
      {"diagnostics", std::chrono::duration<double>(t2 - t1).count()}};
  manifest["artifacts"] = {{"samples", art.samples.filename().string()},
                           {"summary", art.summary.filename().string()},
                           {"tae_trace", art.tae_trace.filename().string()},
                           {"correlation", art.correlation.filename().string()},
                           {"ellipses", art.ellipses.filename().string()}};
  write_file_atomic(art.manifest, manifest.dump(2) + "\n");
  return art;
}

} // namespace demc
