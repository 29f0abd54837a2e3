#ifndef CPF_ERROR_H
#define CPF_ERROR_H

#include <stdexcept>
#include <string>

namespace cpf {

/// Shape or size disagreement between tensors.
class DimensionError : public std::invalid_argument {
public:
  explicit DimensionError(const std::string& msg) : std::invalid_argument(msg) {}
};

/// Invalid configuration (unknown key, bad value, missing column).
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed or inconsistent input data.
class DataError : public std::runtime_error {
public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Numerical failure (non-finite value where finiteness is required).
class NumericError : public std::runtime_error {
public:
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace cpf

#endif
