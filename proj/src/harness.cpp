#include "toeplitz/harness.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <iostream>
#include <limits>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "toeplitz/errors.hpp"
#include "toeplitz/propkern.hpp"
#include "toeplitz/specproj.hpp"

namespace toeplitz::harness {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kLevelTolerance = 1e-10;
constexpr double kTimeDependentStep = 0.005;

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, sep)) out.push_back(trim(item));
  return out;
}

double parse_double(const std::string& text, const std::string& what) {
  const std::string s = trim(text);
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(v)) {
    throw ConfigError(what + ": '" + text + "' is not a finite number");
  }
  return v;
}

int parse_int(const std::string& text, const std::string& what) {
  const double v = parse_double(text, what);
  if (v != std::floor(v) || std::abs(v) > 1e9) throw ConfigError(what + ": '" + text + "' is not an integer");
  return static_cast<int>(v);
}

struct PairSpec {
  spec::PairKind kind;
  double T;
};

PairSpec parse_fhat(const std::string& text) {
  const auto parts = split(text, ':');
  if (parts.size() != 2) throw ConfigError("fhat: expected KIND:T such as bump:3, got '" + text + "'");
  const double T = parse_double(parts[1], "fhat support");
  if (!(T > 0.0)) throw ConfigError("fhat: support T must be positive");
  return {spec::parse_pair_kind(parts[0]), T};
}

std::vector<double> energies(const ExperimentConfig& cfg, const torus::SymbolField& sym, const torus::Point& x) {
  if (cfg.energy.empty()) return {sym.H(0.0, x)};
  if (cfg.energy.find(':') != std::string::npos) return parse_grid(cfg.energy).values();
  return {parse_double(cfg.energy, "energy")};
}

bool level_set_command(Command c) { return c == Command::Projector || c == Command::Lifts; }

struct Model {
  torus::SymbolField principal;
  torus::SymbolField predictor;
  bool model = false;
};

Model experiment_model(const ExperimentConfig& cfg) {
  Model m{experiment_symbol(cfg), experiment_symbol(cfg), cfg.symbol == "model-cos"};
  if (!m.model) m.predictor = m.principal.with_laplacian_subprincipal();
  return m;
}

theta::HermitianOperator build_operator(const Model& m, const theta::QuantumSpace& qs, double t = 0.0,
                                        bool check_resolution = true) {
  if (m.model) return theta::model_operator(qs);
  return theta::toeplitz_build(qs, m.principal, t, check_resolution);
}

// Calls fn(targets, slots) for the nonnegative times (ascending) and the
// negative ones (descending), so each run starts from t = 0.
template <typename Fn>
void by_direction(const std::vector<double>& times, Fn fn) {
  std::vector<double> fwd;
  std::vector<std::size_t> fwd_slots;
  std::vector<double> bwd;
  std::vector<std::size_t> bwd_slots;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] >= 0.0) {
      fwd.push_back(times[i]);
      fwd_slots.push_back(i);
    }
  }
  for (std::size_t i = times.size(); i-- > 0;) {
    if (times[i] < 0.0) {
      bwd.push_back(times[i]);
      bwd_slots.push_back(i);
    }
  }
  if (!fwd.empty()) fn(fwd, fwd_slots);
  if (!bwd.empty()) fn(bwd, bwd_slots);
}

Table propagator_table(const Model& m, const theta::QuantumSpace& qs, const theta::HermitianOperator* op,
                       const torus::Point& x, const std::vector<double>& times) {
  const torus::TorusPhaseSpace ps;
  std::vector<prop::KernelSample> samples;
  if (m.principal.autonomous()) {
    samples = prop::graph_compare(qs, *op, ps, m.predictor, x, times);
  } else {
    if (times.front() < 0.0) throw ConfigError("tgrid: time-dependent symbols need nonnegative times");
    std::vector<std::size_t> index;
    const auto fine = torus::grid_through(times, kTimeDependentStep, index);
    // quadrature resolution is verified on the first frozen operator only
    build_operator(m, qs, times.front());
    const auto all = prop::propagate_timedep([&](double t) { return build_operator(m, qs, t, false); }, fine);
    std::vector<Eigen::MatrixXcd> props;
    for (std::size_t i : index) props.push_back(all[i]);
    samples = prop::graph_compare(qs, props, ps, m.predictor, x, times);
  }
  Table t;
  t.columns = {"t", "re_exact", "im_exact", "re_pred", "im_pred", "abs_exact", "abs_pred", "rel_err_modulus", "phase_err"};
  for (const auto& s : samples) {
    t.rows.push_back({s.t, s.exact.real(), s.exact.imag(), s.predicted.real(), s.predicted.imag(), std::abs(s.exact),
                      std::abs(s.predicted), s.rel_err_modulus, s.phase_err});
  }
  return t;
}

Table projector_table(const ExperimentConfig& cfg, const Model& m, const theta::QuantumSpace& qs,
                      const theta::HermitianOperator& op, const torus::Point& x) {
  const torus::TorusPhaseSpace ps;
  const auto fs = parse_fhat(cfg.fhat);
  const auto pair = spec::build_fourier_pair(fs.kind, fs.T);
  Table t;
  t.columns = {"E", "p", "q", "re_exact", "im_exact", "re_pred", "im_pred", "abs_exact", "abs_pred",
               "rel_err_modulus", "phase_err", "terms", "off_image"};
  for (double E : energies(cfg, m.principal, x)) {
    const std::complex<double> exact = spec::projector_kernel_exact(qs, op, pair, E, x, x);
    spec::ProjectorPrediction pred;
    if (std::abs(m.predictor.H(0.0, x) - E) > kLevelTolerance) {
      pred.off_image = true;
    } else {
      pred = spec::projector_kernel_asymptotic(ps, m.predictor, pair, E, x, x, qs.k());
    }
    const double rel = pred.off_image ? kNaN : prop::rel_err_modulus(exact, pred.value);
    const double phase = pred.off_image ? kNaN : std::arg(exact / pred.value);
    t.rows.push_back({E, x(0), x(1), exact.real(), exact.imag(), pred.value.real(), pred.value.imag(), std::abs(exact),
                      std::abs(pred.value), rel, phase, static_cast<double>(pred.terms.size()),
                      pred.off_image ? 1.0 : 0.0});
  }
  return t;
}

Table lifts_table(const Model& m, int k, const torus::Point& x, const std::vector<double>& times) {
  if (!m.predictor.autonomous()) throw ConfigError("lifts: level-set quantities need an autonomous symbol");
  const torus::TorusPhaseSpace ps;
  const double E = m.predictor.H(0.0, x);
  Table t;
  t.columns = {"t", "transport_L_phase", "prequantum_phase", "rho_half_re", "rho_half_im", "rho_level_half_re",
               "rho_level_half_im"};
  t.rows.assign(times.size(), std::vector<double>(t.columns.size(), 0.0));
  by_direction(times, [&](const std::vector<double>& targets, const std::vector<std::size_t>& slots) {
    std::vector<std::size_t> index;
    const auto grid = torus::grid_through(targets, prop::kPredictorStep, index);
    const auto tr = torus::integrate_flow(ps, m.predictor, x, grid);
    const auto half = torus::rho_graph_half(ps, tr);
    const auto level = torus::rho_level_half(ps, m.predictor, tr, E);
    const auto acc = torus::prequantum_accumulator(tr, k);
    for (std::size_t i = 0; i < targets.size(); ++i) {
      const std::size_t g = index[i];
      t.rows[slots[i]] = {targets[i],           tr.conn_L[g],         acc[g], half[g].value.real(),
                          half[g].value.imag(), level[g].value.real(), level[g].value.imag()};
    }
  });
  return t;
}

}  // namespace

Command parse_command(const std::string& name) {
  if (name == "propagator") return Command::Propagator;
  if (name == "projector") return Command::Projector;
  if (name == "lifts") return Command::Lifts;
  if (name == "selftest") return Command::Selftest;
  throw ConfigError("unknown command '" + name + "' (expected propagator, projector, lifts or selftest)");
}

std::string command_name(Command c) {
  switch (c) {
    case Command::Propagator: return "propagator";
    case Command::Projector: return "projector";
    case Command::Lifts: return "lifts";
    case Command::Selftest: return "selftest";
  }
  return {};
}

std::vector<double> Grid::values() const {
  const long n = static_cast<long>(std::floor((stop - start) / step + 1e-9));
  std::vector<double> v;
  v.reserve(static_cast<std::size_t>(n) + 1);
  for (long i = 0; i <= n; ++i) v.push_back(start + static_cast<double>(i) * step);
  if (std::abs(v.back() - stop) <= 1e-9 * step) v.back() = stop;
  return v;
}

Grid parse_grid(const std::string& text) {
  const auto parts = split(text, ':');
  if (parts.size() != 3) throw ConfigError("grid: expected A:STEP:B, got '" + text + "'");
  Grid g{parse_double(parts[0], "grid start"), parse_double(parts[1], "grid step"), parse_double(parts[2], "grid end")};
  if (!(g.step > 0.0)) throw ConfigError("grid: STEP must be positive in '" + text + "'");
  if (!(g.stop > g.start)) throw ConfigError("grid: B must exceed A in '" + text + "'");
  if ((g.stop - g.start) / g.step > 1e6) throw ConfigError("grid: more than 1e6 samples in '" + text + "'");
  return g;
}

std::vector<torus::Point> parse_points(const std::string& text) {
  std::vector<torus::Point> out;
  for (const auto& item : split(text, ';')) {
    if (item.empty()) continue;
    const auto pq = split(item, ',');
    if (pq.size() != 2) throw ConfigError("point: expected P,Q, got '" + item + "'");
    out.emplace_back(parse_double(pq[0], "point p"), parse_double(pq[1], "point q"));
  }
  if (out.empty()) throw ConfigError("point: no points given");
  return out;
}

void set_value(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  if (key == "experiment.command") {
    cfg.command = parse_command(v);
  } else if (key == "experiment.symbol") {
    if (v.empty()) throw ConfigError("symbol: empty value");
    cfg.symbol = v;
  } else if (key == "experiment.k") {
    cfg.levels.clear();
    for (const auto& item : split(v, ',')) cfg.levels.push_back(parse_int(item, "k"));
    if (cfg.levels.empty()) throw ConfigError("k: no levels given");
  } else if (key == "experiment.point") {
    cfg.points = parse_points(v);
  } else if (key == "grid.tgrid") {
    cfg.tgrid = parse_grid(v);
  } else if (key == "grid.energy") {
    cfg.energy = v;
  } else if (key == "grid.fhat") {
    parse_fhat(v);
    cfg.fhat = v;
  } else if (key == "output.out") {
    cfg.out = v;
  } else if (key == "output.format") {
    if (v != "csv" && v != "json") throw ConfigError("format: expected csv or json, got '" + v + "'");
    cfg.format = v;
  } else {
    throw ConfigError("unknown configuration key '" + key + "'");
  }
}

ExperimentConfig parse_config_text(const std::string& text, ExperimentConfig base) {
  std::istringstream is(text);
  std::string line;
  std::string section;
  int number = 0;
  while (std::getline(is, line)) {
    ++number;
    const std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    const std::string where = "line " + std::to_string(number) + ": ";
    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigError(where + "malformed section header '" + s + "'");
      section = trim(s.substr(1, s.size() - 2));
      if (section != "experiment" && section != "grid" && section != "output") {
        throw ConfigError(where + "unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected key = value");
    if (section.empty()) throw ConfigError(where + "key outside of a section");
    try {
      set_value(base, section + "." + trim(s.substr(0, eq)), s.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
  }
  return base;
}

ExperimentConfig load_config_file(const std::string& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read configuration file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), std::move(base));
}

void validate(const ExperimentConfig& cfg) {
  for (int k : cfg.levels) {
    if (k < 1 || k > kMaxLevel) {
      throw ConfigError("k=" + std::to_string(k) + " is outside 1.." + std::to_string(kMaxLevel) +
                        " (theta sums lose double precision beyond that)");
    }
  }
  if (level_set_command(cfg.command)) {
    for (const auto& x : cfg.points) {
      if (!(x(1) > 0.0 && x(1) < 1.0) || x(1) == 0.5) {
        throw ConfigError("point q=" + format_number(x(1)) + " is not allowed for " + command_name(cfg.command) +
                          ": level-set commands need 0 < q < 1 and q != 0.5 (regular value)");
      }
    }
  }
  if (cfg.format != "csv" && cfg.format != "json") throw ConfigError("format must be csv or json");
  parse_fhat(cfg.fhat);
  if (!cfg.energy.empty()) {
    if (cfg.energy.find(':') != std::string::npos) {
      parse_grid(cfg.energy);
    } else {
      parse_double(cfg.energy, "energy");
    }
  }
  if (cfg.command != Command::Selftest) experiment_symbol(cfg);
}

torus::SymbolField experiment_symbol(const ExperimentConfig& cfg) {
  if (cfg.symbol == "model-cos") return torus::SymbolField::model_cos();
  return torus::SymbolField::from_expression(cfg.symbol);
}

std::vector<Table> run_tables(const ExperimentConfig& cfg) {
  validate(cfg);
  const Model m = experiment_model(cfg);
  const std::vector<double> times = cfg.tgrid.values();
  auto per_level = [&](int k) {
    const theta::QuantumSpace qs(k);
    std::optional<theta::HermitianOperator> op;
    const bool needs_op = cfg.command == Command::Projector ||
                          (cfg.command == Command::Propagator && m.principal.autonomous());
    if (needs_op) op = build_operator(m, qs);
    std::vector<Table> tables;
    for (std::size_t i = 0; i < cfg.points.size(); ++i) {
      const torus::Point& x = cfg.points[i];
      Table t;
      switch (cfg.command) {
        case Command::Propagator: t = propagator_table(m, qs, op ? &*op : nullptr, x, times); break;
        case Command::Projector: t = projector_table(cfg, m, qs, *op, x); break;
        case Command::Lifts: t = lifts_table(m, k, x, times); break;
        case Command::Selftest: throw ConfigError("selftest produces no tables");
      }
      t.k = k;
      t.point = x;
      t.label = "k" + std::to_string(k) + "_p" + std::to_string(i);
      tables.push_back(std::move(t));
    }
    return tables;
  };
  std::vector<std::future<std::vector<Table>>> jobs;
  for (int k : cfg.levels) jobs.push_back(std::async(std::launch::async, per_level, k));
  std::vector<Table> out;
  for (auto& j : jobs) {
    for (auto& t : j.get()) out.push_back(std::move(t));
  }
  return out;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (v == 0.0) return "0";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_csv(const Table& t, std::ostream& os) {
  for (std::size_t c = 0; c < t.columns.size(); ++c) os << (c ? "," : "") << t.columns[c];
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << format_number(row[c]);
    os << '\n';
  }
}

void write_json(const Table& t, const ExperimentConfig& cfg, std::ostream& os) {
  nlohmann::ordered_json j;
  j["command"] = command_name(cfg.command);
  j["symbol"] = cfg.symbol;
  j["k"] = t.k;
  j["point"] = {t.point(0), t.point(1)};
  j["columns"] = t.columns;
  j["rows"] = nlohmann::ordered_json::array();
  for (const auto& row : t.rows) {
    nlohmann::ordered_json r = nlohmann::ordered_json::array();
    for (double v : row) r.push_back(std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr));
    j["rows"].push_back(std::move(r));
  }
  os << j.dump(2) << '\n';
}

std::string table_path(const std::string& out, const Table& t, bool several) {
  if (!several) return out;
  const auto slash = out.find_last_of('/');
  const auto dot = out.find_last_of('.');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return out + "_" + t.label;
  return out.substr(0, dot) + "_" + t.label + out.substr(dot);
}

std::string selftest_json(const std::vector<acceptance::CriterionResult>& results) {
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (const auto& r : results) {
    nlohmann::ordered_json e;
    e["criterion_id"] = r.id;
    e["description"] = r.description;
    e["measured"] = std::isfinite(r.measured) ? nlohmann::ordered_json(r.measured) : nlohmann::ordered_json(nullptr);
    e["bound"] = r.bound;
    e["pass"] = r.pass;
    e["gating"] = r.gating;
    e["note"] = r.note;
    j.push_back(std::move(e));
  }
  return j.dump(2) + "\n";
}

int run(const ExperimentConfig& cfg, std::ostream& log) {
  validate(cfg);
  if (cfg.command == Command::Selftest) {
    acceptance::SuiteOptions opts;
    opts.seed = acceptance::seed_from_env();
    opts.on_result = [&](const acceptance::CriterionResult& r) { log << acceptance::format_line(r) << std::endl; };
    const auto results = acceptance::run_all(opts);
    const std::string text = selftest_json(results);
    if (cfg.out.empty()) {
      std::cout << text;
    } else {
      std::ofstream f(cfg.out, std::ios::binary);
      if (!f) throw ConfigError("cannot write '" + cfg.out + "'");
      f << text;
    }
    return acceptance::all_gating_pass(results) ? 0 : 1;
  }
  const auto tables = run_tables(cfg);
  const bool several = tables.size() > 1;
  for (const auto& t : tables) {
    auto emit = [&](std::ostream& os) {
      if (cfg.format == "json") {
        write_json(t, cfg, os);
      } else {
        write_csv(t, os);
      }
    };
    if (cfg.out.empty()) {
      if (several) std::cout << "# k=" << t.k << " point=" << format_number(t.point(0)) << ","
                             << format_number(t.point(1)) << '\n';
      emit(std::cout);
    } else {
      const std::string path = table_path(cfg.out, t, several);
      std::ofstream f(path, std::ios::binary);
      if (!f) throw ConfigError("cannot write '" + path + "'");
      emit(f);
      log << "wrote " << path << " (" << t.rows.size() << " rows)" << std::endl;
    }
  }
  return 0;
}

}  // namespace toeplitz::harness
