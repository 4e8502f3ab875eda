#pragma once

#include <stdexcept>
#include <string>

namespace fbsde {

// Raised when a computation produces non-finite values, hits a singular
// pivot, or an iteration fails to converge. Bad *inputs* are reported with
// std::invalid_argument instead.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace fbsde

namespace fbsde {

// Bad or missing entry in a parameter file; `key()` names the culprit.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string key, const std::string& what) : std::invalid_argument(what), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

}  // namespace fbsde
