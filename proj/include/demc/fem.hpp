#pragma once

#include "demc/types.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <string>
#include <vector>

namespace demc::fem {

/// Assembled mass and stiffness matrices in SI units.
struct SystemMatrices {
  Eigen::MatrixXd mass;
  Eigen::MatrixXd stiffness;

  Eigen::Index size() const { return mass.rows(); }
};

// ---------------------------------------------------------------------------
// Lumped mass-spring systems

inline constexpr int kGround = -1;

struct Spring {
  std::string name;
  double stiffness = 0.0; // N/m; ignored when the spring is a parameter
  int a = kGround;        // DOF index or kGround
  int b = kGround;
};

struct MassSpringModel {
  std::vector<double> masses; // kg, one per DOF
  std::vector<Spring> springs;
  /// Indices into `springs` whose stiffness is taken from theta, in order.
  std::vector<std::size_t> parameter_map;

  std::size_t dof() const { return masses.size(); }
  void validate() const;
};

/// M = diag(masses); K by superposition of spring contributions.
SystemMatrices assemble_mass_spring(const MassSpringModel &model, const ParameterVector &theta);

// ---------------------------------------------------------------------------
// Planar Euler-Bernoulli frames (transverse displacement + rotation per node)

struct ElementMatrices {
  Eigen::Matrix4d stiffness;
  Eigen::Matrix4d mass;
};

/// Consistent Euler-Bernoulli element in local DOF order (w1, phi1, w2, phi2).
ElementMatrices beam_element_matrices(double youngs_modulus, double inertia, double area,
                                      double density, double length);

enum class SectionProperty { inertia, area };

struct BeamSection {
  std::string name;
  double youngs_modulus = 0.0; // N/m^2
  double density = 0.0;        // kg/m^3
  double inertia = 0.0;        // m^4
  double area = 0.0;           // m^2
};

struct BeamElement {
  int node_a = 0;
  int node_b = 0;
  double length = 0.0; // m
  std::size_t section = 0;
};

enum class NodeDof { displacement = 0, rotation = 1 };

struct NodeConstraint {
  int node = 0;
  NodeDof dof = NodeDof::displacement;
};

/// Attached lumped mass (sensor, shaker stinger) acting on a node's
/// transverse displacement.
struct PointMass {
  int node = 0;
  double mass = 0.0; // kg
};

struct BeamParameter {
  std::size_t section = 0;
  SectionProperty property = SectionProperty::inertia;
};

struct BeamModel {
  int n_nodes = 0;
  std::vector<BeamSection> sections;
  std::vector<BeamElement> elements;
  std::vector<NodeConstraint> constraints;
  std::vector<PointMass> point_masses;
  std::vector<BeamParameter> parameter_map;

  void validate() const;
};

/// Element matrices summed over shared nodal DOFs; constrained DOFs removed.
SystemMatrices assemble_beam(const BeamModel &model, const ParameterVector &theta);

// ---------------------------------------------------------------------------
// Modal analysis

/// Solves K phi = lambda M phi through the Cholesky factor of M and returns
/// f = sqrt(lambda) / (2 pi) for the `n_modes` smallest eigenvalues, ascending.
/// Eigenvalues in [-tol, 0] with tol = 1e-8 * max|lambda| are clamped to zero.
Eigen::VectorXd natural_frequencies(const SystemMatrices &sys, std::size_t n_modes);

/// Wraps a model into theta -> frequencies of modes [skip, skip + n_modes).
FrequencyFunction make_frequency_function(MassSpringModel model, std::size_t n_modes,
                                          std::size_t skip_modes = 0);
FrequencyFunction make_frequency_function(BeamModel model, std::size_t n_modes,
                                          std::size_t skip_modes = 0);

} // namespace demc::fem
