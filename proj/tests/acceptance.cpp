// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
#include "demc/diagnostics.hpp"
#include "demc/error.hpp"
#include "demc/experiment.hpp"
#include "demc/fem.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace demc;
namespace fs = std::filesystem;

namespace {

const std::string kConfigDir = DEMC_CONFIG_DIR;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Result {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char *f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::vector<ExperimentConfig> shipped_configs() {
  std::vector<fs::path> paths;
  for (const auto &e : fs::directory_iterator(kConfigDir))
    if (e.path().extension() == ".json")
      paths.push_back(e.path());
  std::sort(paths.begin(), paths.end());
  std::vector<ExperimentConfig> out;
  for (const auto &p : paths)
    out.push_back(load_config(p));
  return out;
}

// --- 1 ---------------------------------------------------------------------
Result mass_spring_recovery() {
  const auto t0 = std::chrono::steady_clock::now();
  const ExperimentConfig c = load_config(kConfigDir + "/mass_spring.json");
  const nlohmann::json s = summarize(sample(c), c);
  const double secs = seconds_since(t0);
  double max_err = 0, max_cov = 0;
  for (const auto &p : s["parameters"]) {
    max_err = std::max(max_err, p["error_percent"].get<double>());
    max_cov = std::max(max_cov, p["cov_percent"].get<double>());
  }
  const double t = s["tae_percent"]["updated"].get<double>();
  const bool ok = c.sampler.n_chains == 10 && c.sampler.n_generations == 10000 && max_err <= 1.0 &&
                  max_cov <= 2.5 && t <= 0.05 && secs <= 120.0;
  return {ok, "max error " + fmt("%.3f%%", max_err) + ", max c.o.v " + fmt("%.3f%%", max_cov) +
                  ", TAE " + fmt("%.4f%%", t) + ", " + fmt("%.1f s", secs)};
}

// --- 2 ---------------------------------------------------------------------
Result demc_beats_mh() {
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentConfig c = load_config(kConfigDir + "/beam.json");
  c.sampler.algorithm = Algorithm::demc;
  const nlohmann::json de = summarize(sample(c), c);
  c.sampler.algorithm = Algorithm::mh;
  c.sampler.mh_samples = c.sampler.n_chains * c.sampler.n_generations;
  const nlohmann::json mh = summarize(sample(c), c);
  const double secs = seconds_since(t0);
  const double tae_de = de["tae_percent"]["updated"], tae_mh = mh["tae_percent"]["updated"];
  const double cov_de = de["mean_parameter_cov_percent"], cov_mh = mh["mean_parameter_cov_percent"];
  const bool ok = tae_de <= tae_mh && cov_de < cov_mh && secs <= 300.0;
  return {ok, "TAE DE-MC " + fmt("%.4f%%", tae_de) + " vs M-H " + fmt("%.4f%%", tae_mh) +
                  "; mean c.o.v DE-MC " + fmt("%.2f%%", cov_de) + " vs M-H " +
                  fmt("%.2f%%", cov_mh) + ", " + fmt("%.1f s", secs)};
}

// --- 3 ---------------------------------------------------------------------
Result gaussian_stationarity() {
  constexpr int d = 5;
  const Eigen::VectorXd mu = (Eigen::VectorXd(d) << 1.0, -2.0, 3.0, 0.5, 10.0).finished();
  const Eigen::VectorXd sd = (Eigen::VectorXd(d) << 1.0, 0.5, 2.0, 1.5, 3.0).finished();
  Eigen::MatrixXd sigma(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      sigma(i, j) = sd[i] * sd[j] * (i == j ? 1.0 : 0.6);
  const Eigen::MatrixXd precision = sigma.inverse();
  const LogDensity target = [&](const ParameterVector &t) {
    const Eigen::VectorXd r = t - mu;
    return -0.5 * r.dot(precision * r);
  };

  DemcConfig c;
  c.n_chains = 10;
  c.n_generations = 20000;
  c.seed = 2024;
  c.bounds = {mu - 50.0 * sd, mu + 50.0 * sd};
  const SampleTrace trace = run_demc(target, c, Eigen::VectorXd::Zero(d));

  const std::size_t burn = c.n_generations / 5;
  const std::size_t kept = c.n_generations - burn;
  Eigen::MatrixXd x(static_cast<Eigen::Index>(kept * c.n_chains), d);
  for (std::size_t r = burn * c.n_chains, k = 0; r < trace.records.size(); ++r, ++k)
    x.row(static_cast<Eigen::Index>(k)) = trace.records[r].theta.transpose();
  const Eigen::VectorXd mean = x.colwise().mean();
  const Eigen::MatrixXd centered = x.rowwise() - mean.transpose();
  const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(x.rows() - 1);

  // Standard error of the mean by batch means (autocorrelation-aware).
  constexpr std::size_t n_batches = 50;
  const std::size_t rows_per_batch = kept / n_batches * c.n_chains;
  Eigen::MatrixXd bm(n_batches, d);
  for (std::size_t b = 0; b < n_batches; ++b)
    bm.row(static_cast<Eigen::Index>(b)) =
        x.middleRows(static_cast<Eigen::Index>(b * rows_per_batch),
                     static_cast<Eigen::Index>(rows_per_batch))
            .colwise()
            .mean();
  const Eigen::MatrixXd bc = bm.rowwise() - bm.colwise().mean();
  const Eigen::VectorXd se =
      (bc.array().square().colwise().sum() / double(n_batches - 1) / double(n_batches)).sqrt();

  double worst_z = 0, worst_rel = 0;
  for (int i = 0; i < d; ++i) {
    worst_z = std::max(worst_z, std::abs(mean[i] - mu[i]) / se[i]);
    for (int j = 0; j < d; ++j)
      worst_rel = std::max(worst_rel, std::abs(cov(i, j) - sigma(i, j)) / std::abs(sigma(i, j)));
  }
  return {worst_z <= 3.0 && worst_rel <= 0.15,
          "worst mean deviation " + fmt("%.2f", worst_z) + " SE, worst covariance error " +
              fmt("%.1f%%", 100 * worst_rel)};
}

// --- 4 ---------------------------------------------------------------------
// det(K - lambda M) by cofactor expansion, n <= 3.
double char_poly(const Eigen::MatrixXd &K, const Eigen::MatrixXd &M, double lambda) {
  const Eigen::MatrixXd A = K - lambda * M;
  switch (A.rows()) {
  case 1:
    return A(0, 0);
  case 2:
    return A(0, 0) * A(1, 1) - A(0, 1) * A(1, 0);
  default:
    return A(0, 0) * (A(1, 1) * A(2, 2) - A(1, 2) * A(2, 1)) -
           A(0, 1) * (A(1, 0) * A(2, 2) - A(1, 2) * A(2, 0)) +
           A(0, 2) * (A(1, 0) * A(2, 1) - A(1, 1) * A(2, 0));
  }
}

std::vector<double> bisection_roots(const Eigen::MatrixXd &K, const Eigen::MatrixXd &M) {
  // Upper bound on lambda: sum of |K_ij| / min diagonal mass.
  const double hi = K.cwiseAbs().sum() / M.diagonal().minCoeff() * 1.01 + 1.0;
  constexpr int grid = 200000;
  std::vector<double> roots;
  double a = 0.0, fa = char_poly(K, M, a);
  for (int g = 1; g <= grid; ++g) {
    double b = hi * g / grid, fb = char_poly(K, M, b);
    if (fa == 0.0) {
      roots.push_back(a);
    } else if ((fa < 0) != (fb < 0) && fb != 0.0) {
      double lo = a, up = b, flo = fa;
      for (int it = 0; it < 200 && up - lo > 0; ++it) {
        const double mid = 0.5 * (lo + up);
        if (mid == lo || mid == up)
          break;
        const double fm = char_poly(K, M, mid);
        if ((fm < 0) == (flo < 0)) {
          lo = mid;
          flo = fm;
        } else {
          up = mid;
        }
      }
      roots.push_back(0.5 * (lo + up));
    }
    a = b;
    fa = fb;
  }
  return roots;
}

Result eigen_oracle() {
  double worst = 0;
  int systems = 0;
  for (const ExperimentConfig &c : shipped_configs()) {
    const auto *ms = std::get_if<fem::MassSpringModel>(&c.model.model);
    if (!ms || ms->dof() > 3)
      continue;
    const fem::SystemMatrices s = fem::assemble_mass_spring(*ms, c.prior.theta0);
    const std::vector<double> roots = bisection_roots(s.stiffness, s.mass);
    const Eigen::VectorXd f = fem::natural_frequencies(s, ms->dof());
    if (roots.size() != ms->dof())
      return {false, c.name + ": bisection found " + std::to_string(roots.size()) + " roots"};
    for (std::size_t i = 0; i < roots.size(); ++i) {
      const double lam = std::pow(kTwoPi * f[static_cast<Eigen::Index>(i)], 2);
      worst = std::max(worst, std::abs(lam - roots[i]) / roots[i]);
    }
    ++systems;
  }
  const fem::SystemMatrices one{Eigen::MatrixXd::Constant(1, 1, 1.0),
                                Eigen::MatrixXd::Constant(1, 1, kTwoPi * kTwoPi)};
  const double unit = std::abs(fem::natural_frequencies(one, 1)[0] - 1.0);
  return {systems > 0 && worst <= 1e-9 && unit <= 1e-12,
          std::to_string(systems) + " shipped system(s), worst relative eigenvalue error " +
              fmt("%.2e", worst) + "; 1-DOF deviation " + fmt("%.1e Hz", unit)};
}

// --- 5 ---------------------------------------------------------------------
Result scaling_law() {
  double worst = 0;
  int systems = 0;
  for (const ExperimentConfig &c : shipped_configs()) {
    Eigen::VectorXd f1, f4;
    const std::size_t n = c.likelihood.n_modes, skip = c.model.skip_modes;
    if (const auto *ms = std::get_if<fem::MassSpringModel>(&c.model.model)) {
      fem::MassSpringModel scaled = *ms;
      for (auto &sp : scaled.springs)
        sp.stiffness *= 4.0;
      f1 = fem::make_frequency_function(*ms, n, skip)(c.prior.theta0);
      f4 = fem::make_frequency_function(scaled, n, skip)(4.0 * c.prior.theta0);
    } else {
      const auto &bm = std::get<fem::BeamModel>(c.model.model);
      fem::BeamModel scaled = bm;
      for (auto &sec : scaled.sections)
        sec.youngs_modulus *= 4.0;
      f1 = fem::make_frequency_function(bm, n, skip)(c.prior.theta0);
      f4 = fem::make_frequency_function(scaled, n, skip)(c.prior.theta0);
    }
    worst = std::max(worst, ((f4 - 2.0 * f1).array().abs() / (2.0 * f1.array())).maxCoeff());
    ++systems;
  }
  return {worst <= 1e-10, std::to_string(systems) + " shipped models, worst relative deviation " +
                              fmt("%.2e", worst)};
}

// --- 6 ---------------------------------------------------------------------
Result determinism() {
  ExperimentConfig c = load_config(kConfigDir + "/mass_spring.json");
  const fs::path base = fs::temp_directory_path() / "demc_acceptance_determinism";
  fs::remove_all(base);
  std::string files[2];
  for (int k = 0; k < 2; ++k) {
    c.output.directory = (base / (k == 0 ? "a" : "b")).string();
    const RunArtifacts art = run_experiment(c);
    std::ifstream in(art.samples, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    files[k] = ss.str();
  }
  fs::remove_all(base);
  const bool ok = !files[0].empty() && files[0] == files[1];
  return {ok, std::to_string(files[0].size()) + " bytes, " + (ok ? "identical" : "different")};
}

// --- 7 ---------------------------------------------------------------------
Result ellipse_coverage() {
  Eigen::Matrix2d cov;
  cov << 4.0, -1.2, -1.2, 1.0;
  const Eigen::Matrix2d L = cov.llt().matrixL();
  std::mt19937_64 rng(77);
  std::normal_distribution<double> z;
  Eigen::MatrixXd x(100000, 2);
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    x.row(i) = (Eigen::Vector2d(3.0, -1.0) + L * Eigen::Vector2d(z(rng), z(rng))).transpose();
  const diagnostics::Ellipse e = diagnostics::confidence_ellipse(x, 0.95);
  const double frac = diagnostics::ellipse_coverage(e, x);
  return {std::abs(frac - 0.95) <= 0.01, "coverage " + fmt("%.4f", frac)};
}

// --- 8 ---------------------------------------------------------------------
Result beam_element_sanity() {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> logu(-1.0, 1.0);
  double worst_mass = 0, worst_null = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const double E = 7e10 * std::pow(10.0, logu(rng)), I = 3e-8 * std::pow(10.0, logu(rng)),
                 A = 3e-4 * std::pow(10.0, logu(rng)), rho = 2800 * std::pow(10.0, logu(rng)),
                 L = 0.2 * std::pow(10.0, logu(rng));
    const fem::ElementMatrices m = fem::beam_element_matrices(E, I, A, rho, L);
    const Eigen::Vector4d u(1, 0, 1, 0);
    worst_mass = std::max(worst_mass, std::abs(u.dot(m.mass * u) - rho * A * L) / (rho * A * L));
    worst_null = std::max(worst_null, (m.stiffness * u).cwiseAbs().maxCoeff() /
                                          m.stiffness.cwiseAbs().maxCoeff());
  }
  return {worst_mass <= 1e-12 && worst_null <= 1e-12,
          "worst mass error " + fmt("%.1e", worst_mass) + ", worst nullspace residual " +
              fmt("%.1e", worst_null)};
}

} // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Result()>>> criteria = {
      {"1 mass-spring synthetic recovery", mass_spring_recovery},
      {"2 DE-MC beats M-H on the beam", demc_beats_mh},
      {"3 Gaussian stationarity oracle", gaussian_stationarity},
      {"4 eigen-solver oracle", eigen_oracle},
      {"5 stiffness scaling law", scaling_law},
      {"6 determinism", determinism},
      {"7 ellipse coverage", ellipse_coverage},
      {"8 beam element sanity", beam_element_sanity},
  };
  int failures = 0;
  for (const auto &[name, fn] : criteria) {
    Result r;
    try {
      r = fn();
    } catch (const std::exception &e) {
      r = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s  [%s]  %s\n", r.pass ? "PASS" : "FAIL", name.c_str(), r.detail.c_str());
    std::fflush(stdout);
    failures += r.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
