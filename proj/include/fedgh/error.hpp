#pragma once

#include <stdexcept>
#include <string>

namespace fedgh {

// Violated precondition: length mismatch, invalid argument, misuse of an API.
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Dirichlet partitioning could not give every client a sample.
class PartitionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Local training produced a non-finite loss or parameter.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Configuration document problem; field() is the dotted path of the offending key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error(field.empty() ? message : field + ": " + message),
        field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace fedgh
