#pragma once

// Scenario description, parsing and execution behind the command-line tool.
// A scenario is a mode plus keyed real parameters and optional sweep axes; running
// it yields one table row per point of the sweep grid, each row echoing every
// resolved parameter.

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "cvct/chain.hpp"
#include "cvct/errors.hpp"
#include "cvct/grid_oracle.hpp"
#include "cvct/measurement.hpp"
#include "cvct/states.hpp"
#include "cvct/teleport.hpp"

namespace cvct {

/// Invalid scenario: unknown key or mode, malformed value, unparsable file.
class ScenarioError : public UsageError {
 public:
  using UsageError::UsageError;
};

enum class Mode {
  single_prob,
  single_fidelity,
  avg_fidelity,
  chain_prob,
  chain_fidelity,
  optimize_center,
  optimize_theta,
  wigner,
  verify
};

inline const std::vector<std::pair<Mode, std::string>>& mode_names() {
  static const std::vector<std::pair<Mode, std::string>> names = {
      {Mode::single_prob, "single-prob"},         {Mode::single_fidelity, "single-fidelity"},
      {Mode::avg_fidelity, "avg-fidelity"},       {Mode::chain_prob, "chain-prob"},
      {Mode::chain_fidelity, "chain-fidelity"},   {Mode::optimize_center, "optimize-center"},
      {Mode::optimize_theta, "optimize-theta"},   {Mode::wigner, "wigner"},
      {Mode::verify, "verify"}};
  return names;
}

inline std::string to_string(Mode m) {
  for (const auto& [mode, name] : mode_names())
    if (mode == m) return name;
  return "?";
}

inline Mode parse_mode(const std::string& s) {
  for (const auto& [mode, name] : mode_names())
    if (name == s) return mode;
  throw ScenarioError("unknown mode '" + s + "'");
}

/// Parameter keys accepted by --param, --sweep and scenario files.
inline const std::vector<std::string>& parameter_keys() {
  static const std::vector<std::string> keys = {"q0", "p0",     "r1", "r2", "r", "theta",
                                                "width", "center", "p1", "x0", "n", "q",
                                                "p",  "grid_points", "tol"};
  return keys;
}

inline bool is_parameter_key(const std::string& k) {
  const auto& keys = parameter_keys();
  return std::find(keys.begin(), keys.end(), k) != keys.end();
}

struct SweepAxis {
  std::string key;
  double from = 0.0;
  double to = 0.0;
  int steps = 2;

  double value(int i) const {
    return steps == 1 ? from : from + (to - from) * static_cast<double>(i) / static_cast<double>(steps - 1);
  }
};

struct Scenario {
  Mode mode = Mode::single_fidelity;
  std::map<std::string, double> params;
  std::vector<SweepAxis> sweeps;
};

inline std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x + 0.0);
  return buf;
}

inline double parse_number(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw ScenarioError(what + ": '" + text + "' is not a number");
  }
  if (used != text.size()) throw ScenarioError(what + ": '" + text + "' is not a number");
  return v;
}

inline void set_param(Scenario& sc, const std::string& key, double value) {
  if (!is_parameter_key(key)) throw ScenarioError("unknown parameter '" + key + "'");
  if (!std::isfinite(value)) throw ScenarioError("parameter '" + key + "' must be finite");
  sc.params[key] = value;
}

/// "key=value".
inline void apply_param_assignment(Scenario& sc, const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos) throw ScenarioError("expected key=value, got '" + text + "'");
  const std::string key = text.substr(0, eq);
  set_param(sc, key, parse_number(text.substr(eq + 1), "parameter '" + key + "'"));
}

/// "key:from:to:steps".
inline SweepAxis parse_sweep(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string part; std::getline(ss, part, ':');) parts.push_back(part);
  if (parts.size() != 4) throw ScenarioError("sweep must look like key:from:to:steps, got '" + text + "'");
  if (!is_parameter_key(parts[0])) throw ScenarioError("unknown sweep parameter '" + parts[0] + "'");
  SweepAxis ax{parts[0], parse_number(parts[1], "sweep start"), parse_number(parts[2], "sweep end"), 0};
  const double steps = parse_number(parts[3], "sweep steps");
  if (steps < 2 || steps != std::floor(steps)) throw ScenarioError("sweep steps must be an integer >= 2");
  ax.steps = static_cast<int>(steps);
  return ax;
}

inline std::string to_string(const SweepAxis& ax) {
  return ax.key + ":" + format_number(ax.from) + ":" + format_number(ax.to) + ":" + std::to_string(ax.steps);
}

inline nlohmann::json to_json(const Scenario& sc) {
  nlohmann::json j = nlohmann::json::object();
  j["mode"] = to_string(sc.mode);
  for (const auto& [k, v] : sc.params) j[k] = v;
  if (!sc.sweeps.empty()) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& ax : sc.sweeps) arr.push_back(to_string(ax));
    j["sweep"] = arr;
  }
  return j;
}

inline Scenario scenario_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ScenarioError("scenario must be a JSON object");
  Scenario sc;
  if (!j.contains("mode")) throw ScenarioError("scenario is missing 'mode'");
  for (const auto& [key, value] : j.items()) {
    if (key == "mode") {
      if (!value.is_string()) throw ScenarioError("'mode' must be a string");
      sc.mode = parse_mode(value.get<std::string>());
    } else if (key == "sweep") {
      if (value.is_string()) {
        sc.sweeps.push_back(parse_sweep(value.get<std::string>()));
      } else if (value.is_array()) {
        for (const auto& s : value) {
          if (!s.is_string()) throw ScenarioError("'sweep' entries must be strings");
          sc.sweeps.push_back(parse_sweep(s.get<std::string>()));
        }
      } else {
        throw ScenarioError("'sweep' must be a string or an array of strings");
      }
    } else if (is_parameter_key(key)) {
      if (!value.is_number()) throw ScenarioError("parameter '" + key + "' must be a number");
      set_param(sc, key, value.get<double>());
    } else {
      throw ScenarioError("unknown key '" + key + "'");
    }
  }
  return sc;
}

/// Parse scenario text; syntax errors report line and column.
inline Scenario parse_scenario(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const std::size_t offset = e.byte == 0 ? 0 : e.byte - 1;
    std::size_t line = 1, column = 1;
    for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw ScenarioError("scenario parse error at line " + std::to_string(line) + ", column " +
                        std::to_string(column));
  }
  return scenario_from_json(j);
}

inline Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open scenario file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

// Execution.

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

/// Fully resolved parameters of one sweep point.
struct PointParams {
  double q0 = 0, p0 = 0, r1 = 0, r2 = 0, theta = 0, width = 1, center = NAN, p1 = 0, x0 = 0;
  double n = 1, q = 0, p = 0, grid_points = 0, tol = 1e-8;

  SqueezedCoherent input() const { return {q0, p0, r1, theta}; }
  SqueezedVacuum vac() const { return {r2}; }
  Tolerance tolerance() const { return {tol * 1e-2, tol}; }
  std::size_t clusters() const {
    if (n < 1 || n != std::floor(n)) throw ScenarioError("n must be a positive integer");
    return static_cast<std::size_t>(n);
  }
};

inline const std::vector<std::string>& echoed_columns() {
  static const std::vector<std::string> cols = {"q0", "p0", "r1",    "r2", "theta", "width", "center",
                                                "p1", "x0", "n", "q", "p"};
  return cols;
}

inline std::vector<double> echo(const PointParams& pp) {
  return {pp.q0, pp.p0, pp.r1, pp.r2, pp.theta, pp.width, pp.center, pp.p1, pp.x0, pp.n, pp.q, pp.p};
}

inline PointParams resolve(Mode mode, const std::map<std::string, double>& given) {
  auto has = [&](const char* k) { return given.count(k) > 0; };
  auto get = [&](const char* k, double dflt) { return has(k) ? given.at(k) : dflt; };

  PointParams pp;
  const bool chain_reproduction =
      mode == Mode::chain_prob || (mode == Mode::optimize_center && get("n", 1.0) >= 2.0);
  pp.q0 = get("q0", chain_reproduction ? 1.0 : 0.0);
  pp.p0 = get("p0", 0.0);
  pp.r1 = get("r1", get("r", 0.0));
  pp.r2 = get("r2", get("r", 0.0));
  pp.theta = get("theta", mode == Mode::chain_fidelity ? kPi : 0.0);
  pp.width = get("width", 1.0);
  pp.center = get("center", NAN);
  pp.n = get("n", 1.0);
  pp.q = get("q", 0.0);
  pp.p = get("p", 0.0);
  pp.grid_points = get("grid_points", 0.0);
  pp.tol = get("tol", 1e-8);
  if (has("p1") && has("x0")) throw ScenarioError("give either p1 or x0, not both");
  pp.p1 = has("p1") ? given.at("p1") : has("x0") ? given.at("x0") - pp.q0 : -pp.q0;
  pp.x0 = pp.q0 + pp.p1;
  if (!(pp.tol > 0.0)) throw ScenarioError("tol must be positive");
  if (pp.grid_points < 0.0) throw ScenarioError("grid_points must be non-negative");
  return pp;
}

struct ModeOutput {
  std::vector<std::string> columns;
  std::vector<double> values;
};

inline std::vector<std::string> mode_columns(Mode mode) {
  switch (mode) {
    case Mode::single_prob: return {"p_tel", "p_tel_closed_centered", "sigma"};
    case Mode::single_fidelity: return {"fidelity", "fidelity_closed", "outcome_density"};
    case Mode::avg_fidelity:
      return {"avg_fidelity", "avg_fidelity_normalized", "quasi_selective", "window_variation"};
    case Mode::chain_prob: return {"p_tel"};
    case Mode::chain_fidelity: return {"fidelity", "fidelity_closed", "net_variance"};
    case Mode::optimize_center: return {"optimal_center", "p_tel"};
    case Mode::optimize_theta: return {"optimal_theta", "fidelity"};
    case Mode::wigner: return {"wigner_input", "wigner_mode1"};
    case Mode::verify:
      return {"density_quad",  "density_closed", "p_tel_quad",     "p_tel_grid",
              "fidelity_quad", "fidelity_closed", "fidelity_grid", "max_deviation"};
  }
  return {};
}

inline OracleOptions oracle_options(const PointParams& pp) {
  OracleOptions opt;
  if (pp.grid_points > 0) {
    const auto n = next_power_of_two(static_cast<std::size_t>(pp.grid_points));
    opt.min_mode1_points = n;
    opt.min_mode2_points = n;
  }
  return opt;
}

/// Computes one row; `pp.center` is resolved in place when left automatic.
inline std::vector<double> evaluate_point(Mode mode, PointParams& pp) {
  const SqueezedCoherent s = pp.input();
  const SqueezedVacuum vac = pp.vac();
  const Tolerance tol = pp.tolerance();
  validate(s);
  validate(vac);
  auto chain_input = [&] { return as_density(s); };

  switch (mode) {
    case Mode::single_prob: {
      if (std::isnan(pp.center)) pp.center = -pp.q0;
      return {teleport_probability(s, vac, {pp.center, pp.width}, tol),
              teleport_probability_closed(s, vac, pp.width), std::sqrt(outcome_sigma2(s, vac))};
    }
    case Mode::single_fidelity:
      return {fidelity(s, vac, pp.p1, tol), fidelity_closed(s, vac, pp.p1),
              outcome_distribution_closed(s, vac, pp.p1)};
    case Mode::avg_fidelity: {
      if (std::isnan(pp.center)) pp.center = -pp.q0;
      const SelectivityWindow w{pp.center, pp.width};
      const Density rho = as_density(s);
      const double av = average_fidelity(rho, vac, w, tol);
      const double quasi = outcome_distribution(rho, vac, pp.center, tol) * pp.width *
                           fidelity(rho, vac, pp.center, tol);
      return {av, av / teleport_probability(rho, vac, w, tol), quasi,
              quasi_selective_variation(rho, vac, w)};
    }
    case Mode::chain_prob: {
      const std::size_t n = pp.clusters();
      auto spec = uniform_chain(chain_input(), n, pp.r2, SelectivityWindow{0.0, pp.width}, pp.q0);
      if (std::isnan(pp.center)) pp.center = optimize_chain_center(spec, pp.width);
      spec.stages.back().measurement = SelectivityWindow{pp.center, pp.width};
      return {chain_probability(spec, tol)};
    }
    case Mode::chain_fidelity: {
      const std::size_t n = pp.clusters();
      const auto spec = uniform_chain(chain_input(), n, pp.r2, pp.p1, pp.p1);
      const auto env = composite_envelope(spec.stages);
      return {chain_fidelity(spec, tol), chain_fidelity_closed(s, spec.stages), env.net_variance};
    }
    case Mode::optimize_center: {
      const std::size_t n = pp.clusters();
      auto spec = uniform_chain(chain_input(), n, pp.r2, SelectivityWindow{0.0, pp.width}, pp.q0);
      pp.center = optimize_chain_center(spec, pp.width);
      spec.stages.back().measurement = SelectivityWindow{pp.center, pp.width};
      return {pp.center, chain_probability(spec, tol)};
    }
    case Mode::optimize_theta: {
      if (pp.r1 != pp.r2) throw ScenarioError("optimize-theta needs r1 == r2 (use r)");
      const std::size_t n = pp.clusters();
      const double theta = optimize_theta(n, pp.r1, pp.x0);
      const double q0 = pp.x0 / 2.0;
      const SqueezedCoherent sc{q0, 0.0, pp.r1, theta};
      pp.q0 = q0;
      pp.p1 = q0;
      pp.theta = theta;
      return {theta, chain_fidelity(uniform_chain(as_density(sc), n, pp.r2, q0, q0), tol)};
    }
    case Mode::wigner: {
      const Wavefunction psi = as_wavefunction(s);
      return {wigner_function(psi, pp.q, pp.p, tol), cluster_wigner_function(psi, vac, pp.q, pp.p, tol)};
    }
    case Mode::verify: {
      if (std::isnan(pp.center)) pp.center = -pp.q0;
      const Wavefunction psi = as_wavefunction(s);
      const OracleOptions opt = oracle_options(pp);
      const SelectivityWindow w{pp.center, pp.width};
      const double dq = outcome_distribution(s, vac, pp.p1, tol);
      const double dc = outcome_distribution_closed(s, vac, pp.p1);
      const double tq = teleport_probability(s, vac, w, tol);
      const double tg = run_single_cluster(psi, vac, w, {}, opt).p_tel;
      const double fq = fidelity(s, vac, pp.p1, tol);
      const double fc = fidelity_closed(s, vac, pp.p1);
      const double fg = oracle_fidelity(psi, vac, pp.p1, opt);
      const double dev = std::max({std::abs(dq - dc), std::abs(tq - tg), std::abs(fq - fc), std::abs(fg - fc)});
      return {dq, dc, tq, tg, fq, fc, fg, dev};
    }
  }
  return {};
}

/// Cartesian product of the sweep axes, first axis slowest.
inline std::vector<std::map<std::string, double>> sweep_points(const Scenario& sc) {
  std::vector<std::map<std::string, double>> pts{sc.params};
  for (const auto& ax : sc.sweeps) {
    std::vector<std::map<std::string, double>> next;
    for (const auto& base : pts)
      for (int i = 0; i < ax.steps; ++i) {
        auto p = base;
        p[ax.key] = ax.value(i);
        next.push_back(std::move(p));
      }
    pts = std::move(next);
  }
  return pts;
}

/// Run every sweep point on `threads` workers; rows come back in sweep order.
inline Table run_scenario(const Scenario& sc, unsigned threads = 1) {
  const auto points = sweep_points(sc);
  // Resolve every point before starting work.
  std::vector<PointParams> resolved;
  resolved.reserve(points.size());
  for (const auto& p : points) resolved.push_back(resolve(sc.mode, p));

  Table t;
  t.columns = echoed_columns();
  for (const auto& c : mode_columns(sc.mode)) t.columns.push_back(c);
  t.rows.resize(points.size());

  std::vector<std::exception_ptr> errors(points.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < points.size(); i = next++) {
      try {
        PointParams pp = resolved[i];
        const auto values = evaluate_point(sc.mode, pp);
        auto row = echo(pp);
        row.insert(row.end(), values.begin(), values.end());
        t.rows[i] = std::move(row);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(points.size())));
  std::vector<std::thread> pool;
  for (unsigned k = 1; k < n; ++k) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return t;
}

inline std::string to_csv(const Scenario& sc, const Table& t) {
  std::string out;
  const nlohmann::json config = to_json(sc);
  for (const auto& [k, v] : config.items()) out += "# " + k + " = " + v.dump() + "\n";
  for (std::size_t i = 0; i < t.columns.size(); ++i) out += (i ? "," : "") + t.columns[i];
  out += "\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + format_number(row[i]);
    out += "\n";
  }
  return out;
}

inline std::string to_json_text(const Scenario& sc, const Table& t) {
  // Numbers pass through the same fixed formatting as the CSV to keep output byte-stable.
  std::string out = "{\"config\":" + to_json(sc).dump() + ",\"columns\":" + nlohmann::json(t.columns).dump() +
                    ",\"rows\":[";
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    out += r ? ",[" : "[";
    for (std::size_t i = 0; i < t.rows[r].size(); ++i) {
      const double v = t.rows[r][i];
      out += (i ? "," : "") + (std::isfinite(v) ? format_number(v) : std::string("null"));
    }
    out += "]";
  }
  out += "]}\n";
  return out;
}

}  // namespace cvct
