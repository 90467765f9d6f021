#pragma once

#include <stdexcept>
#include <string>

namespace qhl {

enum class ErrorKind {
  invalid_argument,
  not_interior,
  near_boundary,
  disconnected,
  budget_exceeded,
  not_found,
  unsupported,
};

/// Single exception type for the library; `kind()` lets callers branch
/// without string matching.
class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

/// Thrown when two query vertices live in different graph components.
class DisconnectedError : public Error {
public:
  DisconnectedError(long component_a, long component_b)
      : Error(ErrorKind::disconnected, "disconnected: endpoints in components " +
                                           std::to_string(component_a) + " and " +
                                           std::to_string(component_b)),
        a_(component_a), b_(component_b) {}
  long component_a() const noexcept { return a_; }
  long component_b() const noexcept { return b_; }

private:
  long a_;
  long b_;
};

}  // namespace qhl
