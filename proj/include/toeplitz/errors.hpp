#pragma once

#include <stdexcept>
#include <string>

namespace toeplitz {

// Input fails a structural check (non-symplectic matrix, bad complex structure,
// point off the requested level set, ...).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A numerical routine did not reach its accuracy target.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Consecutive samples of a complex path jump by too much to continue a branch.
class GridTooCoarseError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// Quadrature result moved by more than its tolerance under node doubling.
class ResolutionError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// Hamiltonian vector field vanishes (or nearly) where a regular value is needed.
class NonRegularError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Geometric configuration excluded by the formula (tangent field, fixed-point set, ...).
class DegenerateError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace toeplitz
