#ifndef TORUS_ERRORS_HPP
#define TORUS_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace torus {

// Base class for all solver errors so the CLI can map them to exit categories.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct ConfigError : Error {
  using Error::Error;
};

struct ShapeMismatch : Error {
  using Error::Error;
};

struct CutoffOverflow : Error {
  using Error::Error;
};

struct ChartSingular : Error {
  using Error::Error;
};

struct ZeroMeanViolation : Error {
  using Error::Error;
};

struct DivisorUnderflow : Error {
  using Error::Error;
};

struct DiophantineViolation : Error {
  using Error::Error;
};

struct NoContraction : Error {
  using Error::Error;
};

struct NoConvergence : Error {
  using Error::Error;
};

struct IntegratorFailure : Error {
  using Error::Error;
};

}  // namespace torus

#endif
