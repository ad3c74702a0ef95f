// Exception types shared by the simulator, the optimizers and the CLI.
#pragma once

#include <stdexcept>
#include <string>

namespace cfstune {

/// Invalid or inconsistent configuration (workload, simulator, optimizer, CLI).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Argument outside an operation's mathematical domain.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Division by a zero-valued scheduler parameter.
class DivisionError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Illegal task state transition.
class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// The least-squares system has no unique solution.
class SingularFitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Significance statistics requested with zero residual degrees of freedom.
class NoSignificanceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cfstune
