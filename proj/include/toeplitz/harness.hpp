#pragma once
// Experiment configuration, orchestration and table output for the
// toeplitz-propagator command line tool.

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "toeplitz/acceptance.hpp"
#include "toeplitz/torusgeo.hpp"

namespace toeplitz::harness {

inline constexpr int kMaxLevel = 400;

enum class Command { Propagator, Projector, Lifts, Selftest };
Command parse_command(const std::string& name);
std::string command_name(Command c);

struct Grid {
  double start = 0.0;
  double step = 0.01;
  double stop = 1.0;
  std::vector<double> values() const;
};

struct ExperimentConfig {
  Command command = Command::Propagator;
  std::string symbol = "model-cos";
  std::vector<int> levels{100};
  std::vector<torus::Point> points{torus::Point(0.3, 0.1)};
  Grid tgrid;
  // single value or A:STEP:B; empty means H(point)
  std::string energy;
  std::string fhat = "bump:3";
  std::string out;
  std::string format = "csv";
};

// Keys are "section.name": experiment.{command,symbol,k,point},
// grid.{tgrid,energy,fhat}, output.{out,format}. Throws ConfigError on unknown
// keys or malformed values.
void set_value(ExperimentConfig& cfg, const std::string& key, const std::string& value);

// Flat key=value text with [experiment], [grid] and [output] sections;
// '#' starts a comment line.
ExperimentConfig parse_config_text(const std::string& text, ExperimentConfig base = {});
ExperimentConfig load_config_file(const std::string& path, ExperimentConfig base = {});

// Range and regular-value checks. Throws ConfigError with the offending field.
void validate(const ExperimentConfig& cfg);

Grid parse_grid(const std::string& text);
std::vector<torus::Point> parse_points(const std::string& text);

struct Table {
  std::string label;  // e.g. "k100_p0"
  int k = 0;
  torus::Point point = torus::Point::Zero();
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

// Principal symbol of the experiment, and the operator/predictor pair it implies.
torus::SymbolField experiment_symbol(const ExperimentConfig& cfg);

// Tables for propagator, projector and lifts commands, one per (k, point).
std::vector<Table> run_tables(const ExperimentConfig& cfg);

void write_csv(const Table& t, std::ostream& os);
void write_json(const Table& t, const ExperimentConfig& cfg, std::ostream& os);
std::string format_number(double v);

// Output path for one table when several are written: stem_label.ext.
std::string table_path(const std::string& out, const Table& t, bool several);

std::string selftest_json(const std::vector<acceptance::CriterionResult>& results);

// Runs the configured command, writing tables to cfg.out (stdout when empty)
// and progress to log. Returns the process exit status.
int run(const ExperimentConfig& cfg, std::ostream& log);

}  // namespace toeplitz::harness
