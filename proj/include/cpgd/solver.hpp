#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cpgd/problem.hpp"
#include "cpgd/stepsize.hpp"

namespace cpgd {

struct SolverConfig {
  // H_f = eta_multiplier * L_i; must exceed 1/2 so that eta_i = 2 H_f - L_i > 0.
  double eta_multiplier = 0.51;
  std::size_t max_cycles = 1000;
  std::optional<double> time_budget_s;
  // Stop once the full-cycle step norm drops to this; default 1e-8 * sqrt(n).
  std::optional<double> step_tol;
  double root_tol = kDefaultRootTol;
  bool assert_descent = true;
  std::uint64_t seed = 0;
  // Lower bound on H_f when the block Lipschitz constant degenerates to ~0.
  double hf_floor = 1e-12;
  // Evaluate grad h at every cycle end (direct residual, empirical L).
  bool track_stationarity = true;

  void validate() const;
  double effective_step_tol(std::size_t n) const;
};

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Diagnostics of one block visit.
struct BlockStep {
  double alpha = 0.0;
  double H_F = 0.0;
  double H_f = 0.0;
  double L = 0.0;
  double grad_norm = 0.0;
  double d_norm = 0.0;
};

enum class RunStatus { converged, budget_exhausted, descent_violation };

std::string to_string(RunStatus status);

struct CycleRecord {
  std::size_t cycle = 0;
  double elapsed_s = 0.0;
  double F = 0.0;
  double step_norm = 0.0;
  double stat_bound = 0.0;
  double alpha_max = 0.0;
  double HF_max = 0.0;
  // Exact S_F(x_{k+1}) when the feasible set is a box.
  std::optional<double> residual;
  std::vector<BlockStep> blocks;
  std::map<std::string, double> metrics;
};

/// Constants of the stationarity bound S_F(x_{k+1}) <= sqrt(C) ||x_{k+1} - x_k||.
struct StationarityConstants {
  std::size_t N = 1;
  double L = 0.0;
  double H_psi_max = 0.0;
  double H_F_max = 0.0;
};

/// C = 4 N L^2 + 4 N H_psi_max^2 + 2 max(H_F_max, H_F_max^2).
///
/// The H_F term bounds sum_i ||H_F d_i||^2, which needs H_F_max^2; taking the
/// max keeps the commonly quoted 2 H_F_max form whenever H_F_max <= 1.
double stationarity_constant(const StationarityConstants& k);

struct RunLog {
  std::string solver;
  std::size_t dimension = 0;
  std::size_t num_blocks = 0;
  double F0 = 0.0;
  std::vector<CycleRecord> records;
  RunStatus status = RunStatus::budget_exhausted;
  std::optional<std::size_t> violation_cycle;
  // min over visited blocks of 2 H_f - L_i.
  double eta_min = 0.0;
  double H_F_max = 0.0;
  // Largest norm of any visited point, including partially updated ones.
  double max_norm = 0.0;
  StationarityConstants constants;
  bool L_empirical = false;
  Point x_final;

  const CycleRecord& last() const;
};

/// Per-cycle upper bounds sqrt(C) * step_norm on S_F(x_{k+1}).
std::vector<double> stationarity_bound(const RunLog& log, const StationarityConstants& constants);

struct BlockUpdate {
  Point x;
  BlockStep step;
};

/// One CPGD block visit: adaptive stepsize, gradient step on block i, then
/// projection onto Q_i. The partial gradient is taken at x itself, so a
/// sweep of calls is Gauss-Seidel.
BlockUpdate cpgd_block_update(const CompositeProblem& problem, const Point& x, std::size_t i,
                              const SolverConfig& config);

/// Cyclic sweeps i = 0..N-1 until the step tolerance, cycle cap or time budget.
RunLog run_cpgd(const CompositeProblem& problem, const Point& x0, const SolverConfig& config);

/// Full projected gradient with Armijo backtracking (step halving). Produces
/// the same log schema as run_cpgd with a single pseudo-block per cycle.
RunLog run_pgd_baseline(const CompositeProblem& problem, const Point& x0,
                        const SolverConfig& config);

/// Shared bookkeeping for cyclic solvers: timing, descent verification,
/// stopping rules and the stationarity constants filled in at the end.
class RunRecorder {
 public:
  // num_blocks = 0 takes the block count from the problem's partition.
  RunRecorder(const CompositeProblem& problem, const Point& x0, const SolverConfig& config,
              std::string solver_name, std::size_t num_blocks = 0);

  /// Records the cycle x_prev -> x_next. `eta_cycle` is the smallest descent
  /// margin 2 H_f - L_i seen in this cycle, `cycle_max_norm` the largest norm
  /// of any point visited. Returns false once the run must stop.
  bool record_cycle(const Point& x_prev, const Point& x_next, std::vector<BlockStep> steps,
                    double eta_cycle, double cycle_max_norm);

  RunLog finish(Point x_final);

  std::size_t cycles() const { return log_.records.size(); }

 private:
  const CompositeProblem& problem_;
  const SolverConfig& config_;
  RunLog log_;
  double step_tol_;
  double x0_norm_;
  double empirical_L_ = 0.0;
  std::optional<Vector> prev_grad_;
  bool stopped_ = false;
  bool norm_warned_ = false;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace cpgd
