#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "cpgd/config.hpp"
#include "cpgd/rates.hpp"
#include "cpgd/solver.hpp"

namespace cpgd::harness {

struct SolverOutcome {
  RunLog log;
  std::optional<rates::RateFit> fit;
  std::filesystem::path log_path;
};

struct ExperimentResult {
  std::vector<SolverOutcome> runs;
  std::filesystem::path summary_path;

  // True when any run ended on a descent violation.
  bool failed() const;
};

/// Builds the instance, runs the selected solver(s) and writes
/// `<solver>_log.csv`, `summary.txt`, `config.txt` and, with rates on,
/// `<solver>_rates.txt` into the output directory.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Writes X (and W, V next to it when planted factors are requested).
/// Returns the list of files written.
std::vector<std::filesystem::path> gen_data(const DataSpec& spec);

}  // namespace cpgd::harness
