#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace rmsim {

// Argument outside the domain of a demand curve, price interval or solver.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A model violates one or more structural assumptions.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> violations_;
};

// Operation not defined for the given model family.
class UnsupportedError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Refused because the requested tables would not fit the memory guard.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rmsim
