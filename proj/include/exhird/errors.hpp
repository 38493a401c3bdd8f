#pragma once

#include <stdexcept>
#include <string>

namespace exhird {

/// Invalid or inconsistent configuration (CLI exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or unusable input data (CLI exit code 3).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EmptyDocumentError : public DataError {
 public:
  using DataError::DataError;
};

/// Training produced a non-finite loss (CLI exit code 4).
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, std::size_t batch)
      : std::runtime_error(what + " (batch " + std::to_string(batch) + ")"), batch_index(batch) {}
  std::size_t batch_index;
};

}  // namespace exhird
