#pragma once

#include <stdexcept>
#include <string>

namespace cure_copula {

// Exit codes used by the command-line front end.
enum class ExitCode : int { ok = 0, usage = 1, data = 2, numerical = 3 };

/// Parameter outside the admissible domain of a family (copula or marginal).
class ParameterDomainError : public std::invalid_argument {
 public:
  explicit ParameterDomainError(const std::string& what) : std::invalid_argument(what) {}
};

/// Argument outside the support of a function (negative time, q outside (0,1), ...).
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// Caller misuse: empty data, inconsistent options, mismatched inputs.
class UsageError : public std::invalid_argument {
 public:
  explicit UsageError(const std::string& what) : std::invalid_argument(what) {}
};

/// Malformed input data (CSV rows, config files).
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical failure that could not be recovered from.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace cure_copula
