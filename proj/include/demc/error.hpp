#pragma once

#include <stdexcept>
#include <string>

namespace demc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A caller broke a documented precondition (bad dimension, index collision,
/// nonpositive physical property, ...).
class InvalidArgument : public Error {
public:
  using Error::Error;
};

/// An experiment or sampler configuration is inconsistent or malformed.
class ConfigError : public Error {
public:
  using Error::Error;
};

/// The forward model could not be evaluated (decomposition failure, negative
/// eigenvalue, wrong number of modes).
class EvaluationError : public Error {
public:
  using Error::Error;
};

/// A statistic is undefined for the given samples (empty trace, zero mean,
/// zero variance, singular covariance).
class StatisticsError : public Error {
public:
  using Error::Error;
};

} // namespace demc
