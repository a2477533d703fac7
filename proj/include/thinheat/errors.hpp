#pragma once

#include <stdexcept>
#include <string>

namespace thinheat {

// Base class for all recoverable numerical/configuration failures.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct NoConvergence : Error {
  using Error::Error;
};
struct OutsideTubular : Error {
  using Error::Error;
};
struct OutsideDomain : Error {
  using Error::Error;
};
struct SingularMatrix : Error {
  using Error::Error;
};
struct GridMismatch : Error {
  using Error::Error;
};
struct TimeGridMismatch : Error {
  using Error::Error;
};
struct TrajectoryLeftTubular : Error {
  using Error::Error;
};
struct SolveFailure : Error {
  using Error::Error;
};
struct DerivativeNoise : Error {
  using Error::Error;
};
struct DiscretizationDominance : Error {
  using Error::Error;
};
struct DegenerateFit : Error {
  using Error::Error;
};
struct ConfigError : Error {
  using Error::Error;
};
struct BudgetExceeded : Error {
  using Error::Error;
};

}  // namespace thinheat
