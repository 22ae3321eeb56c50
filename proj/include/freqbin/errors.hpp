#pragma once

#include <stdexcept>
#include <string>

namespace freqbin {

/// Referenced a mode or bin that does not exist in the grid.
class ConfigurationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A parameter is outside its physical range.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Arguments are individually valid but inconsistent with each other.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class FitError : public std::runtime_error {
 public:
  FitError(const std::string& what, double best_residual)
      : std::runtime_error(what), best_residual_(best_residual) {}

  double best_residual() const noexcept { return best_residual_; }

 private:
  double best_residual_;
};

/// Manifest parse or schema failure. `pointer` is a JSON-pointer-style path
/// to the offending value ("" for document-level errors).
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string pointer, const std::string& what)
      : std::runtime_error(pointer.empty() ? what : pointer + ": " + what),
        pointer_(std::move(pointer)) {}

  const std::string& pointer() const noexcept { return pointer_; }

 private:
  std::string pointer_;
};

}  // namespace freqbin
