#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cpgd/config.hpp"
#include "cpgd/experiment.hpp"
#include "cpgd/matrix_io.hpp"
#include "cpgd/rates.hpp"
#include "cpgd/run_log_io.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;
constexpr int kExitIo = 4;

using namespace cpgd;

harness::ExperimentConfig load_config(const std::string& path,
                                      const std::vector<std::string>& overrides) {
  auto kv = harness::read_key_values(path);
  harness::apply_overrides(kv, overrides);
  return harness::parse_experiment_config(kv);
}

int cmd_solve(const std::string& path, const std::vector<std::string>& overrides) {
  const auto cfg = load_config(path, overrides);
  const auto result = harness::run_experiment(cfg);
  for (const auto& run : result.runs) {
    const auto& log = run.log;
    std::cout << log.solver << ": " << to_string(log.status) << ", " << log.records.size()
              << " cycles, final F " << io::format_double(log.records.empty() ? log.F0 : log.last().F)
              << " -> " << run.log_path.string() << '\n';
  }
  std::cout << "summary: " << result.summary_path.string() << '\n';
  return result.failed() ? kExitSolver : 0;
}

int cmd_check(const std::string& path, const std::vector<std::string>& overrides) {
  const auto cfg = load_config(path, overrides);
  std::cout << harness::render_config(cfg) << "ok\n";
  return 0;
}

int cmd_gen_data(const std::string& path, const std::vector<std::string>& overrides) {
  harness::KeyValues kv;
  if (!path.empty()) {
    kv = harness::read_key_values(path);
  }
  harness::apply_overrides(kv, overrides);
  const auto spec = harness::parse_data_spec(kv);
  for (const auto& p : harness::gen_data(spec)) {
    std::cout << p.string() << '\n';
  }
  return 0;
}

int cmd_rates(const std::string& path, double tail, const std::string& f_star) {
  std::ifstream in(path);
  if (!in) {
    throw io::IoError("cannot open " + path);
  }
  const auto log = io::read_run_log_csv(in, path);
  rates::FitOptions opts;
  opts.tail_fraction = tail;
  if (f_star == "final") {
    opts.f_star_mode = rates::FStarMode::final_value;
  } else if (f_star == "extrapolate") {
    opts.f_star_mode = rates::FStarMode::extrapolate;
  } else {
    double v = 0.0;
    if (!io::parse_double(f_star, v)) {
      throw harness::ConfigError("--f-star must be final, extrapolate or a number");
    }
    opts.f_star_mode = rates::FStarMode::known;
    opts.f_star = v;
  }
  auto fit = rates::fit_kl_exponent(log, opts);
  if (fit.note.empty()) {
    fit.note = "D unavailable: solver constants are not stored in the run log";
  }
  rates::write_report(std::cout, fit);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cyclic block projected gradient descent with adaptive stepsizes"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;

  auto* solve = app.add_subcommand("solve", "Run an experiment from a key=value config");
  solve->add_option("config", config_path, "Configuration file")->required();
  solve->add_option("overrides", overrides, "key=value overrides (later wins)");

  auto* check = app.add_subcommand("check", "Validate a configuration without running");
  check->add_option("config", config_path, "Configuration file")->required();
  check->add_option("overrides", overrides, "key=value overrides");

  std::string spec_path;
  auto* gen = app.add_subcommand("gen-data", "Write a synthetic ONMF data matrix");
  gen->add_option("spec", spec_path, "Data spec file (key=value); may be omitted");
  gen->add_option("--set", overrides, "key=value overrides")->take_all();

  std::string log_path;
  double tail = 0.5;
  std::string f_star = "final";
  auto* rates_cmd = app.add_subcommand("rates", "Fit the KL exponent of a run log");
  rates_cmd->add_option("runlog", log_path, "Run-log CSV")->required();
  rates_cmd->add_option("--tail", tail, "Fraction of cycles used for the fit")
      ->check(CLI::Range(0.0, 1.0));
  rates_cmd->add_option("--f-star", f_star, "final | extrapolate | <value>");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*solve) return cmd_solve(config_path, overrides);
    if (*check) return cmd_check(config_path, overrides);
    if (*gen) return cmd_gen_data(spec_path, overrides);
    if (*rates_cmd) return cmd_rates(log_path, tail, f_star);
  } catch (const harness::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const io::IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return kExitSolver;
  }
  return 0;
}
