#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>

namespace demc {

/// Updating vector theta. Components carry their own physical units.
using ParameterVector = Eigen::VectorXd;

/// Maps theta to analytical natural frequencies in Hz, ascending.
using FrequencyFunction = std::function<Eigen::VectorXd(const ParameterVector &)>;

/// Unnormalized natural-log density. May return -infinity; throws
/// EvaluationError when the forward model fails.
using LogDensity = std::function<double(const ParameterVector &)>;

/// Componentwise box [lower, upper].
struct Bounds {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  std::size_t dimension() const { return static_cast<std::size_t>(lower.size()); }
  Eigen::VectorXd range() const { return upper - lower; }
  bool contains(const ParameterVector &theta) const;

  /// Throws ConfigError naming the first component with lower >= upper.
  void validate() const;
};

} // namespace demc
