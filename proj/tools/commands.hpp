#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fbsde/models/config.hpp"

namespace fbsde::cli {

enum ExitCode : int { kPass = 0, kAcceptanceFailure = 1, kConfigError = 2, kNumericalFailure = 3 };

struct GridSize {
  std::size_t nx = 0;
  std::size_t nt = 0;
};

//! "NxM" -> {N, M}; throws std::invalid_argument.
GridSize parse_grid(const std::string& text);

struct RunConfig {
  std::string subcommand;   // cva | diffrates | asymptotic | coupled | all
  std::string config_path;  // empty: module defaults
  std::string out_dir = ".";
  std::uint64_t seed = 1;
  std::optional<std::size_t> paths;  // regression mc (diffrates) and stacked mc (coupled)
  std::optional<GridSize> grid;      // pde grid (cva, coupled)
  std::optional<std::size_t> nodes;  // expansion mesh nodes (asymptotic)
};

struct Table {
  std::string file;
  std::string units;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

struct Report {
  std::vector<Table> tables;
  std::vector<std::string> summary;  // one line each, printed to stdout
  bool pass = true;
};

Report cmd_cva(const ParamFile& params, const RunConfig& rc);
Report cmd_diffrates(const ParamFile& params, const RunConfig& rc);
Report cmd_asymptotic(const ParamFile& params, const RunConfig& rc);
Report cmd_coupled(const ParamFile& params, const RunConfig& rc);

//! FNV-1a 64 of the parameters actually given plus seed and resolution overrides.
std::string config_hash(const ParamFile& params, const RunConfig& rc);

//! "# config_hash=...", "# units: ...", header, rows; LF endings.
std::string render(const Table& t, const std::string& hash);

/*!
 * Writes every table of every report into rc.out_dir, each through a
 * temporary file and a rename; on failure nothing of this run is left behind.
 */
void write_reports(const std::vector<Report>& reports, const std::string& out_dir, const std::string& hash);

//! The whole command line; returns an ExitCode.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fbsde::cli
