#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cpgd/onmf.hpp"
#include "cpgd/rates.hpp"
#include "cpgd/solver.hpp"

namespace cpgd::harness {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using KeyValues = std::map<std::string, std::string>;

/// `key = value` lines; `#` starts a comment; later keys win.
KeyValues parse_key_values(std::istream& is, const std::string& source = "<stream>");
KeyValues read_key_values(const std::filesystem::path& path);

/// Applies `key=value` command-line overrides on top of `kv`.
void apply_overrides(KeyValues& kv, std::span<const std::string> overrides);

enum class ProblemKind { onmf, quadratic };
enum class SolverChoice { cpgd, baseline, both };

struct SyntheticSpec {
  int m = 30;
  int n = 40;
  int r = 3;
  double noise = 0.0;
  std::uint64_t seed = 1;
};

struct ExperimentConfig {
  ProblemKind problem = ProblemKind::onmf;

  // quadratic problems
  std::string quadratic_instance = "toy";  // toy | random
  std::size_t quadratic_dim = 20;
  std::vector<std::size_t> quadratic_blocks;
  double quadratic_mu = 0.0;
  bool quadratic_separable = false;
  std::uint64_t data_seed = 1;

  // ONMF problems
  std::optional<std::filesystem::path> data_path;
  SyntheticSpec synthetic;
  double lambda = 10.0;
  bool onmf_generic_path = false;
  onmf::NormConvention norm = onmf::NormConvention::v_block;

  SolverConfig solver;
  SolverChoice which = SolverChoice::cpgd;

  std::filesystem::path output_dir = "cpgd_out";
  bool rates = false;
  rates::FitOptions fit;

  // Fully resolved key set (preset defaults plus user keys), echoed to disk.
  KeyValues resolved;
};

/// Resolves `preset` (quadratic-toy | onmf-small | onmf-large), then parses
/// and validates every key. Unknown keys and bad values raise ConfigError.
ExperimentConfig parse_experiment_config(const KeyValues& kv);

/// Canonical `key=value` rendering of the resolved configuration.
std::string render_config(const ExperimentConfig& config);

/// Synthetic data generation request for `gen-data`.
struct DataSpec {
  SyntheticSpec synthetic;
  std::filesystem::path output = "X.bin";
  bool planted = false;
};

DataSpec parse_data_spec(const KeyValues& kv);

}  // namespace cpgd::harness
