#pragma once

#include <stdexcept>
#include <string>

namespace nli {

// Problems with user input: bad parameters, malformed potentials or measures.
class InvalidArgument : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

// An operation's precondition on the potential does not hold (wrong tail
// class, refused witness, ...). Callers such as the CLI report these as
// "skipped" rather than as failures.
class PreconditionViolated : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Base for every numerical failure; the CLI maps these to exit code 3.
class NumericalError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class QuadratureFailure : public NumericalError {
  public:
    using NumericalError::NumericalError;
};

class OscillatoryQuadratureFailure : public QuadratureFailure {
  public:
    using QuadratureFailure::QuadratureFailure;
};

class NotAbsolutelyIntegrable : public NumericalError {
  public:
    using NumericalError::NumericalError;
};

class NotSquareIntegrable : public NumericalError {
  public:
    using NumericalError::NumericalError;
};

class MassEscapes : public NumericalError {
  public:
    using NumericalError::NumericalError;
};

class DimensionUnsupported : public InvalidArgument {
  public:
    using InvalidArgument::InvalidArgument;
};

class NonDifferentiable : public InvalidArgument {
  public:
    using InvalidArgument::InvalidArgument;
};

class OptimizerStalled : public NumericalError {
  public:
    using NumericalError::NumericalError;
};

class WitnessFailed : public NumericalError {
  public:
    WitnessFailed(const std::string& what, double energy)
        : NumericalError(what), energy_(energy) {}
    double energy() const noexcept { return energy_; }

  private:
    double energy_;
};

// An internal invariant (descent monotonicity, translation invariance) was
// observed to fail. CLI exit code 4.
class InvariantViolation : public std::logic_error {
  public:
    using std::logic_error::logic_error;
};

}  // namespace nli
