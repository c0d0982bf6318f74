#pragma once

#include <stdexcept>
#include <string>

namespace ringqc {

/// Base class for all library errors.
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// An input violated a mathematical domain requirement (e.g. nonpositive
/// frequency where a positive one is required).
class DomainError : public Error {
  public:
    using Error::Error;
};

/// Registry lookup failed; carries the offending identifier.
class UnknownSpeciesError : public Error {
  public:
    explicit UnknownSpeciesError(const std::string& name)
        : Error("unknown species: '" + name + "'"), name_(name) {}
    const std::string& name() const { return name_; }

  private:
    std::string name_;
};

class UnknownMachineError : public Error {
  public:
    explicit UnknownMachineError(const std::string& name)
        : Error("unknown machine: '" + name + "'"), name_(name) {}
    const std::string& name() const { return name_; }

  private:
    std::string name_;
};

/// A species record lacks data required by the requested operation.
class MissingDataError : public Error {
  public:
    using Error::Error;
};

/// Config file could not be parsed; message carries file/line context.
class ConfigError : public Error {
  public:
    using Error::Error;
};

/// A structurally valid input violates a documented precondition.
class ValidationError : public Error {
  public:
    using Error::Error;
};

/// Iterative solver hit its iteration cap; carries the residual reached.
class ConvergenceError : public Error {
  public:
    ConvergenceError(const std::string& what, double residual)
        : Error(what), residual_(residual) {}
    double residual() const { return residual_; }

  private:
    double residual_ = 0.0;
};

/// A configuration handed to the mode solver is not a local minimum.
class InstabilityError : public Error {
  public:
    using Error::Error;
};

/// Requested pulse does not fit between consecutive ion transits; carries
/// the longest pulse length that would fit.
class CrosstalkError : public Error {
  public:
    CrosstalkError(const std::string& what, double max_feasible_pulse)
        : Error(what), max_feasible_pulse_(max_feasible_pulse) {}
    double max_feasible_pulse() const { return max_feasible_pulse_; }

  private:
    double max_feasible_pulse_ = 0.0;
};

/// Integrator time step violates the resolution guard.
class StepSizeError : public Error {
  public:
    using Error::Error;
};

/// Not enough trajectory history for the requested estimate.
class InsufficientHistoryError : public Error {
  public:
    using Error::Error;
};

/// Observation window is too short to align unambiguously.
class AmbiguityError : public Error {
  public:
    using Error::Error;
};

} // namespace ringqc
