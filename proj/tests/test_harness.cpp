#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "doctest.h"
#include "toeplitz/errors.hpp"
#include "toeplitz/harness.hpp"

using namespace toeplitz;
using namespace toeplitz::harness;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("toeplitz_harness_" + name)).string();
}

}  // namespace

TEST_CASE("configuration defaults and file parsing") {
  const ExperimentConfig d = parse_config_text("");
  CHECK(d.symbol == "model-cos");
  REQUIRE(d.levels.size() == 1);
  CHECK(d.levels[0] == 100);
  REQUIRE(d.points.size() == 1);
  CHECK(d.points[0] == torus::Point(0.3, 0.1));
  CHECK(d.format == "csv");

  const std::string text =
      "# plot data\n[experiment]\ncommand = projector\nk = 50, 100\npoint = 0.3,0.1; 0.5,0.7\n"
      "[grid]\ntgrid = 0.8:0.001:0.9\nfhat = gaussian:4.5\n[output]\nformat = json\nout = table.json\n";
  const ExperimentConfig c = parse_config_text(text);
  CHECK(c.command == Command::Projector);
  CHECK(c.levels == std::vector<int>{50, 100});
  CHECK(c.points.size() == 2);
  CHECK(c.points[1] == torus::Point(0.5, 0.7));
  CHECK(c.tgrid.values().size() == 101);
  CHECK(c.tgrid.values().back() == 0.9);
  CHECK(c.fhat == "gaussian:4.5");
  CHECK(c.out == "table.json");

  // flags override file values
  ExperimentConfig o = c;
  set_value(o, "experiment.k", "25");
  CHECK(o.levels == std::vector<int>{25});

  CHECK_THROWS_AS(parse_config_text("[experiment]\ncolour = red\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("[plots]\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("k = 5\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("[experiment]\nk\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("[experiment]\nk = ten\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("[grid]\ntgrid = 0:0:1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("[grid]\nfhat = box:3\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("[output]\nformat = xml\n"), ConfigError);
  CHECK_THROWS_AS(load_config_file(temp_path("missing.cfg")), ConfigError);
}

TEST_CASE("validation guards") {
  ExperimentConfig c;
  c.command = Command::Projector;
  c.points = {torus::Point(0.3, 0.5)};
  CHECK_THROWS_AS(validate(c), ConfigError);
  c.points = {torus::Point(0.3, 0.0)};
  CHECK_THROWS_AS(validate(c), ConfigError);
  c.points = {torus::Point(0.3, 0.1)};
  CHECK_NOTHROW(validate(c));
  c.command = Command::Propagator;
  c.points = {torus::Point(0.3, 0.5)};
  CHECK_NOTHROW(validate(c));
  c.levels = {1000};
  CHECK_THROWS_AS(validate(c), ConfigError);
  c.levels = {10};
  c.symbol = "cos(2*pi*q";
  CHECK_THROWS_AS(validate(c), ConfigError);
}

TEST_CASE("grids") {
  const Grid g = parse_grid("0:0.01:1");
  const auto v = g.values();
  CHECK(v.size() == 101);
  CHECK(v[37] == 0.37);
  CHECK(v.back() == 1.0);
  CHECK(parse_grid("0:0.3:1").values().size() == 4);
  CHECK_THROWS_AS(parse_grid("1:0.1:0"), ConfigError);
  CHECK_THROWS_AS(parse_grid("0:1"), ConfigError);
}

TEST_CASE("CSV output is deterministic and round-trips") {
  ExperimentConfig c;
  c.levels = {20};
  c.points = {torus::Point(0.3, 0.1)};
  c.tgrid = parse_grid("0:0.1:0.5");
  const auto a = run_tables(c);
  const auto b = run_tables(c);
  REQUIRE(a.size() == 1);
  std::ostringstream sa;
  std::ostringstream sb;
  write_csv(a[0], sa);
  write_csv(b[0], sb);
  CHECK(sa.str() == sb.str());
  const std::string csv = sa.str();
  CHECK(csv.rfind("t,re_exact,im_exact,re_pred,im_pred,abs_exact,abs_pred,rel_err_modulus,phase_err\n", 0) == 0);
  CHECK(csv.find('\r') == std::string::npos);
  CHECK(csv.back() == '\n');
  // every value parses back to the stored double
  std::istringstream is(csv);
  std::string line;
  std::getline(is, line);
  std::size_t r = 0;
  while (std::getline(is, line)) {
    std::istringstream ls(line);
    std::string cell;
    std::size_t col = 0;
    while (std::getline(ls, cell, ',')) {
      CHECK(std::strtod(cell.c_str(), nullptr) == a[0].rows[r][col]);
      ++col;
    }
    CHECK(col == 9);
    ++r;
  }
  CHECK(r == 6);
  CHECK(format_number(0.1) == "0.10000000000000001");
  CHECK(format_number(-0.0) == "0");
}

TEST_CASE("command tables") {
  ExperimentConfig c;
  c.levels = {10, 20};
  c.points = {torus::Point(0.3, 0.1), torus::Point(0.5, 0.7)};
  c.tgrid = parse_grid("-0.2:0.1:0.2");
  c.command = Command::Lifts;
  const auto lifts = run_tables(c);
  REQUIRE(lifts.size() == 4);
  CHECK(lifts[0].label == "k10_p0");
  CHECK(lifts[3].label == "k20_p1");
  CHECK(lifts[0].columns.size() == 7);
  CHECK(lifts[0].rows[2][0] == 0.0);
  CHECK(lifts[0].rows[2][3] == 1.0);
  // prequantum phase scales with k for the vanishing subprincipal symbol
  CHECK(std::abs(lifts[2].rows[4][2] - 2.0 * lifts[0].rows[4][2]) < 1e-12);

  c.command = Command::Projector;
  c.levels = {30};
  c.points = {torus::Point(0.3, 0.1)};
  c.energy = "0.7:0.05:0.9";
  const auto proj = run_tables(c);
  REQUIRE(proj.size() == 1);
  REQUIRE(proj[0].rows.size() == 5);
  int on_level = 0;
  for (const auto& row : proj[0].rows) {
    const bool off = row[12] == 1.0;
    if (!off) {
      ++on_level;
      CHECK(std::abs(row[0] - std::cos(0.2 * std::numbers::pi)) < 1e-10);
      CHECK(row[9] < 0.05);
    } else {
      CHECK(std::isnan(row[9]));
    }
  }
  CHECK(on_level == 0);  // the grid misses cos(0.2 pi) = 0.809...
  c.energy.clear();
  const auto diag = run_tables(c);
  CHECK(diag[0].rows[0][12] == 0.0);
  CHECK(diag[0].rows[0][9] < 0.05);
}

TEST_CASE("expression symbols") {
  ExperimentConfig c;
  c.symbol = "cos(2*pi*q)+0.2*cos(2*pi*p)";
  c.levels = {30};
  c.tgrid = parse_grid("0:0.25:0.5");
  const auto t = run_tables(c);
  REQUIRE(t[0].rows.size() == 3);
  for (const auto& row : t[0].rows) {
    CHECK(row[7] < 0.02);
    CHECK(std::abs(row[8]) < 0.05);
  }
  c.symbol = "cos(2*pi*q)+0.2*t*cos(2*pi*p)";
  c.levels = {10};
  c.tgrid = parse_grid("0:0.1:0.2");
  const auto td = run_tables(c);
  REQUIRE(td[0].rows.size() == 3);
  CHECK(td[0].rows[0][7] < 1e-10);
  CHECK(td[0].rows[2][7] < 0.05);
  c.tgrid = parse_grid("-0.2:0.1:0.2");
  CHECK_THROWS_AS(run_tables(c), ConfigError);
}

TEST_CASE("output files and JSON") {
  Table t;
  t.label = "k50_p1";
  CHECK(table_path("out/fig.csv", t, false) == "out/fig.csv");
  CHECK(table_path("out/fig.csv", t, true) == "out/fig_k50_p1.csv");
  CHECK(table_path("out.d/fig", t, true) == "out.d/fig_k50_p1");

  ExperimentConfig c;
  c.levels = {10, 12};
  c.tgrid = parse_grid("0:0.5:1");
  c.format = "json";
  c.out = temp_path("prop.json");
  std::ostringstream log;
  CHECK(run(c, log) == 0);
  const std::string p10 = temp_path("prop_k10_p0.json");
  REQUIRE(std::filesystem::exists(p10));
  const auto j = nlohmann::json::parse(read_file(p10));
  CHECK(j["command"] == "propagator");
  CHECK(j["k"] == 10);
  CHECK(j["rows"].size() == 3);
  CHECK(j["columns"][0] == "t");
  std::filesystem::remove(p10);
  std::filesystem::remove(temp_path("prop_k12_p0.json"));

  acceptance::CriterionResult r{"A0", "demo", std::nan(""), 1.0, false, true, "n"};
  const auto s = nlohmann::json::parse(selftest_json({r}));
  REQUIRE(s.size() == 1);
  for (const char* key : {"criterion_id", "description", "measured", "bound", "pass"}) CHECK(s[0].contains(key));
  CHECK(s[0]["measured"].is_null());
  CHECK(s[0]["pass"] == false);
}
