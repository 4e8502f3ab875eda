#include "fbsde/models/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "fbsde/error.hpp"

namespace fbsde {
namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

const std::vector<std::string>& model_keys() {
  static const std::vector<std::string> keys{"r",  "R", "mu", "sigma", "lambda",  "h",    "T",
                                             "S0", "K", "K1", "K2",    "epsilon", "delta"};
  return keys;
}

ParamFile ParamFile::parse(const std::string& text, const std::vector<std::string>& allowed) {
  ParamFile pf;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(line, "line " + std::to_string(lineno) + ": expected key=value, got '" + line + "'");
    }
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError(key, "line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(val.data(), val.data() + val.size(), v);
    if (val.empty() || ec != std::errc() || ptr != val.data() + val.size() || !std::isfinite(v)) {
      throw ConfigError(key, "line " + std::to_string(lineno) + ": key '" + key + "' has non-numeric value '" + val + "'");
    }
    if (pf.values_.count(key)) {
      throw ConfigError(key, "line " + std::to_string(lineno) + ": key '" + key + "' given twice");
    }
    pf.values_[key] = v;
  }
  return pf;
}

ParamFile ParamFile::load(const std::string& path, const std::vector<std::string>& allowed) {
  std::ifstream f(path);
  if (!f) throw ConfigError("", "cannot open parameter file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse(ss.str(), allowed);
}

double ParamFile::get(const std::string& key, double fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

}  // namespace fbsde
