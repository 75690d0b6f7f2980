#pragma once

#include <stdexcept>
#include <string>

namespace acsparse {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: bad sizes, bad parameters, broken invariants.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class ShapeMismatch : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// A potential derivative was requested outside its domain of definition.
class DomainError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class InvalidOrder : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class InvalidInitial : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// A modelling assumption (A1)-(A7 style) is not satisfied by the input.
class AssumptionViolation : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class FullModeRequiresA7 : public AssumptionViolation {
 public:
  using AssumptionViolation::AssumptionViolation;
};

/// Numerical failure inside a solver.
class SolverError : public Error {
 public:
  using Error::Error;
};

class NewtonDivergence : public SolverError {
 public:
  using SolverError::SolverError;
};

class SeparationViolation : public SolverError {
 public:
  using SolverError::SolverError;
};

class LinearSolveFailure : public SolverError {
 public:
  using SolverError::SolverError;
};

class RootFindFailure : public SolverError {
 public:
  using SolverError::SolverError;
};

class NonmonotoneDecrease : public SolverError {
 public:
  using SolverError::SolverError;
};

}  // namespace acsparse
