#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gtv {

// Bad argument values (out-of-range latitude, zero counts, negative rates...).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Mathematically ill-posed requests: inadmissible operators, incompatible
// sampling functionals, zero matrices.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Inconsistent numerical settings such as an aliasing truncation/quadrature pair.
class ConfigurationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Calling an operation on a model that does not support it (gradient of a
// non-smooth cost, APGD on a proximable-only cost).
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Iterative method failure or loss of positive definiteness.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace gtv
