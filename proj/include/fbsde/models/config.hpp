#pragma once

#include <map>
#include <string>
#include <vector>

namespace fbsde {

/*!
 * Flat key=value parameter file; '#' starts a comment, blank lines ignored.
 * Only keys listed in `allowed` are accepted and every value must parse as a
 * finite number; violations raise ConfigError naming the key.
 */
class ParamFile {
 public:
  static ParamFile parse(const std::string& text, const std::vector<std::string>& allowed);
  static ParamFile load(const std::string& path, const std::vector<std::string>& allowed);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  double get(const std::string& key, double fallback) const;
  const std::map<std::string, double>& values() const { return values_; }
  void set(const std::string& key, double v) { values_[key] = v; }

 private:
  std::map<std::string, double> values_;
};

//! Keys recognised by the CLI: r, R, mu, sigma, lambda, h, T, S0, K, K1, K2, epsilon, delta.
const std::vector<std::string>& model_keys();

}  // namespace fbsde
