#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "commands.hpp"

using namespace fbsde;
using namespace fbsde::cli;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("fbsde_cli_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& f) const { return (path / f).string(); }
};

struct Outcome {
  int code;
  std::string out, err;
};

Outcome invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "fbsde_cli");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// data rows (after the two comment lines and the header), split on commas
std::vector<std::vector<std::string>> rows(const std::string& path) {
  std::istringstream in(slurp(path));
  std::string line;
  std::vector<std::vector<std::string>> out;
  int n = 0;
  while (std::getline(in, line)) {
    if (n++ < 3) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.push_back("");
    out.push_back(cells);
  }
  return out;
}

void write(const std::string& path, const std::string& text) { std::ofstream(path) << text; }

}  // namespace

TEST(Cli, ParseGrid) {
  auto g = parse_grid("400x2000");
  EXPECT_EQ(g.nx, 400u);
  EXPECT_EQ(g.nt, 2000u);
  for (const char* bad : {"400", "x20", "400x", "4x20", "400x1", "40ax20", "400x20x3"})
    EXPECT_THROW(parse_grid(bad), std::invalid_argument) << bad;
}

TEST(Cli, ConfigHashTracksInputsOnly) {
  RunConfig rc;
  ParamFile a = ParamFile::parse("h=0.03\nr=0.02\n", model_keys());
  ParamFile b = ParamFile::parse("# same\nr = 0.02\nh=0.03\n", model_keys());
  EXPECT_EQ(config_hash(a, rc), config_hash(b, rc));
  EXPECT_EQ(config_hash(a, rc).size(), 16u);
  RunConfig other = rc;
  other.out_dir = "/elsewhere";
  other.subcommand = "cva";
  EXPECT_EQ(config_hash(a, rc), config_hash(a, other));
  other.seed = 2;
  EXPECT_NE(config_hash(a, rc), config_hash(a, other));
  other = rc;
  other.paths = 1000;
  EXPECT_NE(config_hash(a, rc), config_hash(a, other));
  EXPECT_NE(config_hash(a, rc), config_hash(ParamFile::parse("h=0\nr=0.02\n", model_keys()), rc));
}

TEST(Cli, RenderHasHashUnitsAndHeader) {
  Table t{"x.csv", "T in years", {"a", "b"}, {{"1", "2.5"}, {"3", ""}}};
  EXPECT_EQ(render(t, "00ff"), "# config_hash=00ff\n# units: T in years\na,b\n1,2.5\n3,\n");
}

TEST(Cli, CvaDefaultImprovesEveryMaturity) {
  TempDir dir("cva");
  auto r = invoke({"cva", "--out", dir.path.string()});
  ASSERT_EQ(r.code, kPass) << r.err;
  auto ts = rows(dir.file("cva_term_structure.csv"));
  ASSERT_EQ(ts.size(), 10u);
  for (std::size_t i = 0; i < ts.size(); ++i) {
    ASSERT_EQ(ts[i].size(), 7u);
    EXPECT_EQ(std::stod(ts[i][0]), static_cast<double>(i + 1));
    EXPECT_DOUBLE_EQ(std::stod(ts[i][5]), std::stod(ts[i][3]) + std::stod(ts[i][4]));
  }
  for (const auto& row : rows(dir.file("cva_improvement.csv"))) EXPECT_EQ(row.back(), "PASS");
  std::string text = slurp(dir.file("cva_term_structure.csv"));
  EXPECT_EQ(text.rfind("# config_hash=", 0), 0u);
  EXPECT_NE(text.find("\n# units: "), std::string::npos);
  EXPECT_EQ(text.find('\r'), std::string::npos);
  EXPECT_NE(r.out.find("PASS"), std::string::npos);
}

TEST(Cli, CvaWithoutIntensityHasNoCorrections) {
  TempDir dir("cva_h0");
  write(dir.file("p.cfg"), "h = 0\n");
  auto r = invoke({"cva", "--config", dir.file("p.cfg"), "--out", dir.path.string(), "--grid", "200x400"});
  ASSERT_EQ(r.code, kPass) << r.err;
  for (const auto& row : rows(dir.file("cva_term_structure.csv"))) {
    EXPECT_EQ(row[3], "0");
    EXPECT_EQ(row[5], "0");
    EXPECT_NEAR(std::stod(row[6]), std::stod(row[2]), 1e-3);
  }
}

TEST(Cli, BadConfigExitsTwoAndWritesNothing) {
  TempDir dir("bad");
  write(dir.file("p.cfg"), "r=0.02\nsigma=fast\n");
  fs::path out = dir.path / "out";
  auto r = invoke({"cva", "--config", dir.file("p.cfg"), "--out", out.string()});
  EXPECT_EQ(r.code, kConfigError);
  EXPECT_NE(r.err.find("sigma"), std::string::npos);
  EXPECT_FALSE(fs::exists(out));

  write(dir.file("q.cfg"), "vol=0.2\n");
  r = invoke({"cva", "--config", dir.file("q.cfg"), "--out", out.string()});
  EXPECT_EQ(r.code, kConfigError);
  EXPECT_NE(r.err.find("vol"), std::string::npos);

  EXPECT_EQ(invoke({"cva", "--config", dir.file("missing.cfg")}).code, kConfigError);
  EXPECT_EQ(invoke({"cva", "--grid", "10by10"}).code, kConfigError);
  EXPECT_EQ(invoke({"--seed", "x", "cva"}).code, kConfigError);
  EXPECT_EQ(invoke({}).code, kConfigError);
  write(dir.file("s.cfg"), "sigma=-0.2\n");
  EXPECT_EQ(invoke({"cva", "--config", dir.file("s.cfg"), "--out", out.string()}).code, kConfigError);
  EXPECT_FALSE(fs::exists(out));
}

TEST(Cli, DiffRatesWithoutSpreadOrPremiumHasNoCorrections) {
  TempDir dir("dr");
  write(dir.file("p.cfg"), "R=0.01\nmu=0.01\n");
  auto r = invoke({"diffrates", "--config", dir.file("p.cfg"), "--out", dir.path.string(), "--paths", "1000"});
  ASSERT_EQ(r.code, kPass) << r.err;
  auto t = rows(dir.file("diffrates.csv"));
  ASSERT_EQ(t.size(), 5u);
  EXPECT_EQ(t[1][0], "1");
  EXPECT_EQ(t[1][1], "0");
  EXPECT_EQ(t[2][1], "0");
  EXPECT_EQ(t[3][1], t[0][1]);
  EXPECT_EQ(t[4][0], "mc");
  EXPECT_EQ(t[4][5], "inconclusive: stderr exceeds tolerance");
}

TEST(Cli, AsymptoticLadderPasses) {
  TempDir dir("asym");
  auto r = invoke({"asymptotic", "--out", dir.path.string()});
  ASSERT_EQ(r.code, kPass) << r.err;
  auto t = rows(dir.file("asymptotic_delta_scaling.csv"));
  ASSERT_EQ(t.size(), 7u);
  EXPECT_EQ(t[0][0], "0.2");
  EXPECT_EQ(t[4][0], "0.05");
  for (std::size_t i = 2; i < 6; ++i) {
    EXPECT_GE(std::stod(t[i][5]), 6.0);
    EXPECT_LE(std::stod(t[i][5]), 10.0);
  }
  EXPECT_EQ(t[6][1], "Z_delta0");
  EXPECT_EQ(t[6][3], "0");

  write(dir.file("p.cfg"), "delta=0\n");
  EXPECT_EQ(invoke({"asymptotic", "--config", dir.file("p.cfg"), "--out", dir.path.string()}).code, kConfigError);
}

TEST(Cli, CoupledWithZeroEpsHasNoResiduals) {
  TempDir dir("coupled");
  write(dir.file("p.cfg"), "epsilon=0\n");
  auto r = invoke({"coupled", "--config", dir.file("p.cfg"), "--out", dir.path.string(), "--paths", "200", "--grid",
                   "120x100"});
  ASSERT_EQ(r.code, kPass) << r.err;
  auto b4 = rows(dir.file("coupled_b4.csv"));
  ASSERT_EQ(b4.size(), 2u);
  for (const auto& row : b4) {
    EXPECT_EQ(row[2], "0");
    EXPECT_EQ(row[5], "exact");
    EXPECT_EQ(row[6], "0");
    EXPECT_EQ(row[9], "exact");
  }
  for (const auto& row : rows(dir.file("coupled_recursion.csv"))) {
    EXPECT_EQ(row[3], "0");
    EXPECT_EQ(row[5], "exact");
  }
  EXPECT_EQ(rows(dir.file("coupled_orders.csv")).size(), 18u);
}

TEST(Cli, SameSeedGivesIdenticalBytes) {
  TempDir dir("repeat");
  auto a = dir.path / "a", b = dir.path / "b";
  for (const auto& out : {a, b}) ASSERT_EQ(invoke({"asymptotic", "--out", out.string(), "--nodes", "80"}).code, kPass);
  std::string f = "asymptotic_delta_scaling.csv";
  EXPECT_EQ(slurp((a / f).string()), slurp((b / f).string()));
}

TEST(Cli, FailedWriteLeavesNothingBehind) {
  TempDir dir("rollback");
  fs::create_directories(dir.path / "second.csv");  // the rename onto it fails
  Report rep;
  rep.tables = {{"first.csv", "u", {"a"}, {{"1"}}}, {"second.csv", "u", {"a"}, {{"2"}}}};
  EXPECT_ANY_THROW(write_reports({rep}, dir.path.string(), "0"));
  EXPECT_FALSE(fs::exists(dir.path / "first.csv"));
  EXPECT_FALSE(fs::exists(dir.path / "first.csv.tmp"));
  EXPECT_FALSE(fs::exists(dir.path / "second.csv.tmp"));
}
