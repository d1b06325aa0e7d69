#include "demc/fem.hpp"

#include "demc/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

namespace demc {

bool Bounds::contains(const ParameterVector &theta) const {
  if (theta.size() != lower.size())
    return false;
  return ((theta.array() >= lower.array()) && (theta.array() <= upper.array())).all();
}

void Bounds::validate() const {
  if (lower.size() != upper.size())
    throw ConfigError("bounds: lower has " + std::to_string(lower.size()) +
                      " components but upper has " + std::to_string(upper.size()));
  for (Eigen::Index i = 0; i < lower.size(); ++i) {
    if (!std::isfinite(lower[i]) || !std::isfinite(upper[i]) || !(lower[i] < upper[i])) {
      std::ostringstream os;
      os << "bounds: component " << i + 1 << " has lower " << lower[i] << " >= upper "
         << upper[i];
      throw ConfigError(os.str());
    }
  }
}

} // namespace demc

namespace demc::fem {

namespace {

void require_positive(double value, const std::string &what) {
  if (!(value > 0.0) || !std::isfinite(value))
    throw InvalidArgument(what + " must be positive and finite, got " + std::to_string(value));
}

void check_theta_size(const ParameterVector &theta, std::size_t expected) {
  if (static_cast<std::size_t>(theta.size()) != expected)
    throw InvalidArgument("theta has " + std::to_string(theta.size()) +
                          " components, model expects " + std::to_string(expected));
}

} // namespace

void MassSpringModel::validate() const {
  if (masses.empty())
    throw InvalidArgument("mass-spring model has no masses");
  for (std::size_t i = 0; i < masses.size(); ++i)
    require_positive(masses[i], "mass " + std::to_string(i));
  const int n = static_cast<int>(masses.size());
  std::vector<bool> is_param(springs.size(), false);
  for (std::size_t idx : parameter_map) {
    if (idx >= springs.size())
      throw InvalidArgument("parameter map refers to spring " + std::to_string(idx) +
                            " but only " + std::to_string(springs.size()) + " springs exist");
    if (is_param[idx])
      throw InvalidArgument("parameter map lists spring " + std::to_string(idx) + " twice");
    is_param[idx] = true;
  }
  for (std::size_t s = 0; s < springs.size(); ++s) {
    const Spring &sp = springs[s];
    if (sp.a == kGround && sp.b == kGround)
      throw InvalidArgument("spring " + std::to_string(s) + " connects ground to ground");
    for (int end : {sp.a, sp.b})
      if (end != kGround && (end < 0 || end >= n))
        throw InvalidArgument("spring " + std::to_string(s) + " endpoint " +
                              std::to_string(end) + " out of range");
    if (sp.a == sp.b)
      throw InvalidArgument("spring " + std::to_string(s) + " connects a DOF to itself");
    if (!is_param[s])
      require_positive(sp.stiffness, "stiffness of spring " + std::to_string(s));
  }
}

SystemMatrices assemble_mass_spring(const MassSpringModel &model, const ParameterVector &theta) {
  check_theta_size(theta, model.parameter_map.size());
  const Eigen::Index n = static_cast<Eigen::Index>(model.dof());

  std::vector<double> k(model.springs.size());
  for (std::size_t s = 0; s < model.springs.size(); ++s)
    k[s] = model.springs[s].stiffness;
  for (std::size_t p = 0; p < model.parameter_map.size(); ++p) {
    require_positive(theta[static_cast<Eigen::Index>(p)],
                     "stiffness parameter " + std::to_string(p + 1));
    k[model.parameter_map[p]] = theta[static_cast<Eigen::Index>(p)];
  }

  SystemMatrices sys;
  sys.mass = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    sys.mass(i, i) = model.masses[static_cast<std::size_t>(i)];

  sys.stiffness = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t s = 0; s < model.springs.size(); ++s) {
    const int a = model.springs[s].a;
    const int b = model.springs[s].b;
    if (a != kGround)
      sys.stiffness(a, a) += k[s];
    if (b != kGround)
      sys.stiffness(b, b) += k[s];
    if (a != kGround && b != kGround) {
      sys.stiffness(a, b) -= k[s];
      sys.stiffness(b, a) -= k[s];
    }
  }
  return sys;
}

ElementMatrices beam_element_matrices(double youngs_modulus, double inertia, double area,
                                      double density, double length) {
  require_positive(youngs_modulus, "Young's modulus");
  require_positive(inertia, "second moment of area");
  require_positive(area, "cross-section area");
  require_positive(density, "density");
  require_positive(length, "element length");

  const double L = length;
  const double L2 = L * L;
  ElementMatrices em;
  em.stiffness << 12, 6 * L, -12, 6 * L,
                  6 * L, 4 * L2, -6 * L, 2 * L2,
                  -12, -6 * L, 12, -6 * L,
                  6 * L, 2 * L2, -6 * L, 4 * L2;
  em.stiffness *= youngs_modulus * inertia / (L2 * L);

  em.mass << 156, 22 * L, 54, -13 * L,
             22 * L, 4 * L2, 13 * L, -3 * L2,
             54, 13 * L, 156, -22 * L,
             -13 * L, -3 * L2, -22 * L, 4 * L2;
  em.mass *= density * area * L / 420.0;
  return em;
}

void BeamModel::validate() const {
  if (n_nodes < 2)
    throw InvalidArgument("beam model needs at least two nodes");
  if (elements.empty())
    throw InvalidArgument("beam model has no elements");
  for (std::size_t s = 0; s < sections.size(); ++s) {
    const BeamSection &sec = sections[s];
    require_positive(sec.youngs_modulus, "Young's modulus of section " + sec.name);
    require_positive(sec.density, "density of section " + sec.name);
  }
  for (std::size_t e = 0; e < elements.size(); ++e) {
    const BeamElement &el = elements[e];
    if (el.node_a < 0 || el.node_a >= n_nodes || el.node_b < 0 || el.node_b >= n_nodes ||
        el.node_a == el.node_b)
      throw InvalidArgument("element " + std::to_string(e) + " has invalid nodes");
    require_positive(el.length, "length of element " + std::to_string(e));
    if (el.section >= sections.size())
      throw InvalidArgument("element " + std::to_string(e) + " refers to unknown section");
  }
  for (const NodeConstraint &c : constraints)
    if (c.node < 0 || c.node >= n_nodes)
      throw InvalidArgument("constraint on unknown node " + std::to_string(c.node));
  for (const PointMass &pm : point_masses) {
    if (pm.node < 0 || pm.node >= n_nodes)
      throw InvalidArgument("point mass on unknown node " + std::to_string(pm.node));
    require_positive(pm.mass, "point mass on node " + std::to_string(pm.node));
  }
  for (std::size_t p = 0; p < parameter_map.size(); ++p) {
    if (parameter_map[p].section >= sections.size())
      throw InvalidArgument("parameter " + std::to_string(p + 1) + " refers to unknown section");
    for (std::size_t q = 0; q < p; ++q)
      if (parameter_map[q].section == parameter_map[p].section &&
          parameter_map[q].property == parameter_map[p].property)
        throw InvalidArgument("parameter " + std::to_string(p + 1) + " duplicates parameter " +
                              std::to_string(q + 1));
  }
}

SystemMatrices assemble_beam(const BeamModel &model, const ParameterVector &theta) {
  check_theta_size(theta, model.parameter_map.size());

  std::vector<BeamSection> sections = model.sections;
  for (std::size_t p = 0; p < model.parameter_map.size(); ++p) {
    const double value = theta[static_cast<Eigen::Index>(p)];
    require_positive(value, "beam parameter " + std::to_string(p + 1));
    BeamSection &sec = sections[model.parameter_map[p].section];
    if (model.parameter_map[p].property == SectionProperty::inertia)
      sec.inertia = value;
    else
      sec.area = value;
  }

  const Eigen::Index full = 2 * static_cast<Eigen::Index>(model.n_nodes);
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(full, full);
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(full, full);
  for (const BeamElement &el : model.elements) {
    const BeamSection &sec = sections[el.section];
    const ElementMatrices em =
        beam_element_matrices(sec.youngs_modulus, sec.inertia, sec.area, sec.density, el.length);
    const Eigen::Index dofs[4] = {2 * el.node_a, 2 * el.node_a + 1, 2 * el.node_b,
                                  2 * el.node_b + 1};
    for (int r = 0; r < 4; ++r) {
      for (int c = 0; c < 4; ++c) {
        K(dofs[r], dofs[c]) += em.stiffness(r, c);
        M(dofs[r], dofs[c]) += em.mass(r, c);
      }
    }
  }
  for (const PointMass &pm : model.point_masses)
    M(2 * pm.node, 2 * pm.node) += pm.mass;

  std::vector<bool> fixed(static_cast<std::size_t>(full), false);
  for (const NodeConstraint &c : model.constraints)
    fixed[static_cast<std::size_t>(2 * c.node + static_cast<int>(c.dof))] = true;
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < full; ++i)
    if (!fixed[static_cast<std::size_t>(i)])
      keep.push_back(i);

  const Eigen::Index n = static_cast<Eigen::Index>(keep.size());
  SystemMatrices sys;
  sys.stiffness.resize(n, n);
  sys.mass.resize(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < n; ++c) {
      sys.stiffness(r, c) = K(keep[r], keep[c]);
      sys.mass(r, c) = M(keep[r], keep[c]);
    }
  }
  return sys;
}

Eigen::VectorXd natural_frequencies(const SystemMatrices &sys, std::size_t n_modes) {
  const Eigen::Index n = sys.size();
  if (sys.stiffness.rows() != n || sys.stiffness.cols() != n || sys.mass.cols() != n)
    throw InvalidArgument("mass and stiffness matrices have inconsistent shapes");
  if (n_modes == 0 || static_cast<Eigen::Index>(n_modes) > n)
    throw InvalidArgument("requested " + std::to_string(n_modes) + " modes from a system with " +
                          std::to_string(n) + " DOFs");

  const Eigen::LLT<Eigen::MatrixXd> chol(sys.mass);
  if (chol.info() != Eigen::Success)
    throw EvaluationError("mass matrix is not positive definite");

  // A = L^-1 K L^-T keeps the problem symmetric.
  const auto L = chol.matrixL();
  Eigen::MatrixXd A = L.solve(sys.stiffness);
  A = L.solve(A.transpose()).transpose();
  A = 0.5 * (A + A.transpose());

  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(A, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success)
    throw EvaluationError("symmetric eigensolver did not converge");

  const Eigen::VectorXd &lambda = eig.eigenvalues(); // ascending
  const double tol = 1e-8 * lambda.cwiseAbs().maxCoeff();
  Eigen::VectorXd freqs(static_cast<Eigen::Index>(n_modes));
  for (Eigen::Index i = 0; i < freqs.size(); ++i) {
    double l = lambda[i];
    if (l < -tol) {
      std::ostringstream os;
      os << "negative eigenvalue " << l << " (mode " << i + 1 << ") beyond tolerance " << tol;
      throw EvaluationError(os.str());
    }
    l = std::max(l, 0.0);
    freqs[i] = std::sqrt(l) / (2.0 * std::numbers::pi);
  }
  return freqs;
}

namespace {

template <typename Assemble>
FrequencyFunction wrap(Assemble assemble, std::size_t n_modes, std::size_t skip_modes) {
  return [assemble = std::move(assemble), n_modes, skip_modes](const ParameterVector &theta) {
    try {
      const SystemMatrices sys = assemble(theta);
      const Eigen::VectorXd all = natural_frequencies(sys, n_modes + skip_modes);
      return Eigen::VectorXd(all.tail(static_cast<Eigen::Index>(n_modes)));
    } catch (const InvalidArgument &e) {
      // A theta the model cannot represent is a failed evaluation, not a caller bug.
      throw EvaluationError(e.what());
    }
  };
}

} // namespace

FrequencyFunction make_frequency_function(MassSpringModel model, std::size_t n_modes,
                                          std::size_t skip_modes) {
  model.validate();
  return wrap([model = std::move(model)](const ParameterVector &theta) {
    return assemble_mass_spring(model, theta);
  }, n_modes, skip_modes);
}

FrequencyFunction make_frequency_function(BeamModel model, std::size_t n_modes,
                                          std::size_t skip_modes) {
  model.validate();
  return wrap([model = std::move(model)](const ParameterVector &theta) {
    return assemble_beam(model, theta);
  }, n_modes, skip_modes);
}

} // namespace demc::fem
