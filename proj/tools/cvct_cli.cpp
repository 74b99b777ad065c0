#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include "cvct/scenario.hpp"

namespace {

unsigned thread_count(int flag) {
  if (flag > 0) return static_cast<unsigned>(flag);
  if (const char* env = std::getenv("CVCT_THREADS")) {
    const double v = cvct::parse_number(env, "CVCT_THREADS");
    if (v < 1 || v != static_cast<int>(v)) throw cvct::ScenarioError("CVCT_THREADS must be a positive integer");
    return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Teleportation through continuous-variable cluster chains"};
  std::string mode, scenario_path, out_path, format = "csv";
  std::vector<std::string> params, sweeps;
  double grid_points = 0.0, tol = 0.0;
  int threads = 0;

  app.add_option("--mode", mode, "single-prob, single-fidelity, avg-fidelity, chain-prob, chain-fidelity, "
                                 "optimize-center, optimize-theta, wigner, verify");
  app.add_option("--param", params, "key=value (repeatable)");
  app.add_option("--sweep", sweeps, "key:from:to:steps (repeatable; cartesian product)");
  app.add_option("--scenario", scenario_path, "JSON scenario file; flags override its values");
  app.add_option("--out", out_path, "output path (default stdout)");
  app.add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--grid-points", grid_points, "minimum points per grid axis for the grid oracle");
  app.add_option("--tol", tol, "relative quadrature tolerance");
  app.add_option("--threads", threads, "worker threads (default CVCT_THREADS or hardware)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    cvct::Scenario sc;
    if (!scenario_path.empty()) {
      sc = cvct::load_scenario_file(scenario_path);
    } else if (mode.empty()) {
      throw cvct::ScenarioError("either --mode or --scenario is required");
    }
    if (!mode.empty()) sc.mode = cvct::parse_mode(mode);
    for (const auto& p : params) cvct::apply_param_assignment(sc, p);
    for (const auto& s : sweeps) sc.sweeps.push_back(cvct::parse_sweep(s));
    if (app.count("--grid-points")) cvct::set_param(sc, "grid_points", grid_points);
    if (app.count("--tol")) cvct::set_param(sc, "tol", tol);

    const cvct::Table table = cvct::run_scenario(sc, thread_count(threads));
    const std::string text = format == "json" ? cvct::to_json_text(sc, table) : cvct::to_csv(sc, table);
    if (out_path.empty()) {
      std::cout << text;
    } else {
      std::ofstream out(out_path, std::ios::binary);
      if (!out) throw cvct::ScenarioError("cannot write '" + out_path + "'");
      out << text;
    }
    return 0;
  } catch (const cvct::UsageError& e) {
    std::cerr << "cvct_cli: " << e.what() << "\n";
    return 2;
  } catch (const cvct::DomainError& e) {
    std::cerr << "cvct_cli: " << e.what() << "\n";
    return 2;
  } catch (const cvct::Error& e) {
    std::cerr << "cvct_cli: numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "cvct_cli: numerical failure: " << e.what() << "\n";
    return 3;
  }
}
