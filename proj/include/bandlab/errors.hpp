#pragma once

#include <stdexcept>
#include <string>

namespace bandlab {

// A factorization pivot fell below the degeneracy floor.  In this model the
// offending sample set has probability zero; callers resample and count it.
class NearSingular : public std::runtime_error {
 public:
  explicit NearSingular(const std::string& what) : std::runtime_error(what) {}
};

// Argument outside the mathematical domain of the function (e.g. s <= 0).
class DomainError : public std::invalid_argument {
 public:
  explicit DomainError(const std::string& what) : std::invalid_argument(what) {}
};

// The 1-D density is not integrable with the given coefficients.
class IntegrabilityError : public std::runtime_error {
 public:
  explicit IntegrabilityError(const std::string& what)
      : std::runtime_error(what) {}
};

// Invalid or incomplete experiment configuration.  Message names the field.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Regression input has fewer than two distinct abscissae (or is otherwise
// unusable for a least-squares fit).
class DegenerateFit : public std::invalid_argument {
 public:
  explicit DegenerateFit(const std::string& what)
      : std::invalid_argument(what) {}
};

class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace bandlab
