// toeplitz-propagator: propagator, projector and lift tables on the torus, and
// the acceptance self-test.

#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "toeplitz/errors.hpp"
#include "toeplitz/harness.hpp"

int main(int argc, char** argv) {
  using namespace toeplitz;
  CLI::App app{"Berezin-Toeplitz propagators and spectral projectors on the torus"};
  app.set_version_flag("--version", "toeplitz-propagator 1.0");

  std::string command;
  std::string config_file;
  std::vector<std::string> k_values;
  std::vector<std::string> points;
  std::string tgrid;
  std::string energy;
  std::string fhat;
  std::string symbol;
  std::string out;
  std::string format;

  app.add_option("command", command, "propagator | projector | lifts | selftest")->required();
  app.add_option("--config", config_file, "key=value file with [experiment], [grid], [output] sections");
  app.add_option("--k", k_values, "level(s), comma separated or repeated (<= 400)")->delimiter(',');
  app.add_option("--point", points, "base point P,Q (repeatable)");
  app.add_option("--tgrid", tgrid, "time grid A:STEP:B");
  app.add_option("--energy", energy, "energy E or grid A:STEP:B (default H at the point)");
  app.add_option("--fhat", fhat, "Fourier pair bump:T or gaussian:T");
  app.add_option("--symbol", symbol, "model-cos or an expression in p, q (and t)");
  app.add_option("--out", out, "output path (stdout when omitted)");
  app.add_option("--format", format, "csv | json")->check(CLI::IsMember({"csv", "json"}));

  CLI11_PARSE(app, argc, argv);

  try {
    harness::ExperimentConfig cfg;
    if (!config_file.empty()) cfg = harness::load_config_file(config_file);
    harness::set_value(cfg, "experiment.command", command);
    auto join = [](const std::vector<std::string>& items, const char* sep) {
      std::string s;
      for (std::size_t i = 0; i < items.size(); ++i) s += (i ? sep : "") + items[i];
      return s;
    };
    if (!k_values.empty()) harness::set_value(cfg, "experiment.k", join(k_values, ","));
    if (!points.empty()) harness::set_value(cfg, "experiment.point", join(points, ";"));
    if (!symbol.empty()) harness::set_value(cfg, "experiment.symbol", symbol);
    if (!tgrid.empty()) harness::set_value(cfg, "grid.tgrid", tgrid);
    if (!energy.empty()) harness::set_value(cfg, "grid.energy", energy);
    if (!fhat.empty()) harness::set_value(cfg, "grid.fhat", fhat);
    if (!out.empty()) harness::set_value(cfg, "output.out", out);
    if (!format.empty()) harness::set_value(cfg, "output.format", format);
    return harness::run(cfg, std::cerr);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
