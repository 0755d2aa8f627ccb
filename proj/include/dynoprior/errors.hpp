#pragma once

#include <stdexcept>
#include <string>

namespace dyno {

/// Base class for all library errors.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Unknown system name or missing system parameter.
struct CatalogError : Error {
  using Error::Error;
};

/// Integration produced a non-finite state. `step` is the first bad step.
struct DivergenceError : Error {
  DivergenceError(const std::string& what, long step_index)
      : Error(what), step(step_index) {}
  long step;
};

/// Sampling request cannot be satisfied (empty selection, bad decimation).
struct SamplingError : Error {
  using Error::Error;
};

/// Estimator requires uniform spacing and the input is not uniform.
struct SpacingError : Error {
  using Error::Error;
};

/// Training loss became non-finite. `iteration` names the failing step.
struct TrainingDivergedError : Error {
  TrainingDivergedError(const std::string& what, long iter)
      : Error(what), iteration(iter) {}
  long iteration;
};

/// Malformed or truncated network byte stream.
struct SerializationError : Error {
  using Error::Error;
};

/// STLSQ eliminated every candidate term for some output dimension.
struct DegenerateModelError : Error {
  using Error::Error;
};

/// Network reconstruction error is above the caller's gate; its features
/// cannot be trusted for mode counting.
struct UntrustedFeaturesError : Error {
  using Error::Error;
};

/// Matrix construction request does not fit the given data.
struct SizeError : Error {
  using Error::Error;
};

/// Invalid experiment configuration.
struct ConfigError : Error {
  using Error::Error;
};

/// Plot rendering failed (e.g. empty series).
struct PlotError : Error {
  using Error::Error;
};

}  // namespace dyno
