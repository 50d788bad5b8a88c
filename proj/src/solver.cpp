#include "cpgd/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "cpgd/log.hpp"

namespace cpgd {
namespace {

constexpr double kDescentSlack = 1e-8;
constexpr double kNormGrowthWarning = 1e6;
constexpr double kBacktrackFloor = 1e-30;
constexpr double kBaselineMaxStep = 1e12;

bool all_finite(const Vector& v) { return v.allFinite(); }

Point project_all(const CompositeProblem& problem, const Point& v) {
  const auto& part = problem.partition();
  Point out = v;
  for (std::size_t i = 0; i < part.num_blocks(); ++i) {
    assign_block(out, i, problem.project_block(extract_block(v, i, part), i), part);
  }
  return out;
}

}  // namespace

void SolverConfig::validate() const {
  if (!(eta_multiplier > 0.5) || !std::isfinite(eta_multiplier)) {
    throw std::invalid_argument("eta_multiplier must be finite and > 0.5");
  }
  if (time_budget_s && !(*time_budget_s > 0.0)) {
    throw std::invalid_argument("time_budget must be positive");
  }
  if (step_tol && !(*step_tol >= 0.0)) {
    throw std::invalid_argument("step_tol must be nonnegative");
  }
  if (!(root_tol > 0.0)) {
    throw std::invalid_argument("root_tol must be positive");
  }
  if (!(hf_floor > 0.0)) {
    throw std::invalid_argument("hf_floor must be positive");
  }
}

double SolverConfig::effective_step_tol(std::size_t n) const {
  return step_tol.value_or(1e-8 * std::sqrt(static_cast<double>(n)));
}

std::string to_string(RunStatus status) {
  switch (status) {
    case RunStatus::converged:
      return "converged";
    case RunStatus::budget_exhausted:
      return "budget-exhausted";
    case RunStatus::descent_violation:
      return "descent-violation";
  }
  return "unknown";
}

double stationarity_constant(const StationarityConstants& k) {
  const double N = static_cast<double>(k.N);
  return 4.0 * N * k.L * k.L + 4.0 * N * k.H_psi_max * k.H_psi_max +
         2.0 * std::max(k.H_F_max, k.H_F_max * k.H_F_max);
}

std::vector<double> stationarity_bound(const RunLog& log, const StationarityConstants& constants) {
  const double root_c = std::sqrt(stationarity_constant(constants));
  std::vector<double> out;
  out.reserve(log.records.size());
  for (const auto& rec : log.records) {
    out.push_back(root_c * rec.step_norm);
  }
  return out;
}

const CycleRecord& RunLog::last() const {
  if (records.empty()) {
    throw std::logic_error("run log has no cycles");
  }
  return records.back();
}

BlockUpdate cpgd_block_update(const CompositeProblem& problem, const Point& x, std::size_t i,
                              const SolverConfig& config) {
  const auto& part = problem.partition();
  const Vector grad = problem.h_partial_grad(x, i);
  if (!all_finite(grad)) {
    throw SolverError("non-finite partial gradient at block " + std::to_string(i));
  }

  BlockStep step;
  step.grad_norm = grad.norm();
  step.L = problem.block_lipschitz(x, i);
  if (!std::isfinite(step.L) || step.L < 0.0) {
    throw SolverError("invalid block Lipschitz constant at block " + std::to_string(i));
  }
  step.H_f = std::max(config.eta_multiplier * step.L, config.hf_floor);

  const auto growth = problem.hessian_growth(i);
  StepsizePolyParams params;
  params.p = growth.p;
  params.H_psi = growth.H_psi;
  params.x_norm = problem.stepsize_norm(x, i);
  params.H_f = step.H_f;
  params.grad_norm = step.grad_norm;
  const auto sz = adaptive_stepsize(params, config.root_tol);
  step.alpha = sz.alpha;
  step.H_F = sz.H_F;

  const Vector current = extract_block(x, i, part);
  const Vector target = problem.project_block(current - grad / step.H_F, i);
  step.d_norm = (target - current).norm();

  BlockUpdate out{x, step};
  assign_block(out.x, i, target, part);
  return out;
}

RunRecorder::RunRecorder(const CompositeProblem& problem, const Point& x0,
                         const SolverConfig& config, std::string solver_name,
                         std::size_t num_blocks)
    : problem_(problem), config_(config), start_(std::chrono::steady_clock::now()) {
  log_.solver = std::move(solver_name);
  log_.dimension = static_cast<std::size_t>(x0.size());
  log_.num_blocks = num_blocks > 0 ? num_blocks : problem.partition().num_blocks();
  log_.F0 = problem.value(x0);
  log_.eta_min = std::numeric_limits<double>::infinity();
  log_.max_norm = x0.norm();
  if (!std::isfinite(log_.F0)) {
    throw SolverError("objective is not finite at the starting point");
  }
  step_tol_ = config.effective_step_tol(log_.dimension);
  x0_norm_ = x0.norm();
  if (config.track_stationarity) {
    prev_grad_ = problem.h_grad(x0);
  }
}

bool RunRecorder::record_cycle(const Point& x_prev, const Point& x_next,
                               std::vector<BlockStep> steps, double eta_cycle,
                               double cycle_max_norm) {
  if (stopped_) {
    return false;
  }
  const auto now = std::chrono::steady_clock::now();

  CycleRecord rec;
  rec.cycle = log_.records.size() + 1;
  rec.elapsed_s = std::chrono::duration<double>(now - start_).count();
  rec.F = problem_.value(x_next);
  if (!std::isfinite(rec.F) || !all_finite(x_next)) {
    throw SolverError("non-finite iterate at cycle " + std::to_string(rec.cycle));
  }
  rec.step_norm = (x_next - x_prev).norm();
  for (const auto& s : steps) {
    rec.alpha_max = std::max(rec.alpha_max, s.alpha);
    rec.HF_max = std::max(rec.HF_max, s.H_F);
  }
  rec.blocks = std::move(steps);
  log_.H_F_max = std::max(log_.H_F_max, rec.HF_max);
  log_.eta_min = std::min(log_.eta_min, eta_cycle);
  log_.max_norm = std::max(log_.max_norm, cycle_max_norm);

  if (config_.track_stationarity) {
    Vector grad = problem_.h_grad(x_next);
    if (auto box = problem_.box()) {
      rec.residual = box_stationarity_residual(grad, x_next, *box);
    }
    if (rec.step_norm > 0.0) {
      empirical_L_ = std::max(empirical_L_, (grad - *prev_grad_).norm() / rec.step_norm);
    }
    prev_grad_ = std::move(grad);
  }
  rec.metrics = problem_.metrics(x_next);

  const double F_prev = log_.records.empty() ? log_.F0 : log_.records.back().F;
  bool violated = false;
  if (config_.assert_descent) {
    const double allowed = F_prev - 0.5 * log_.eta_min * rec.step_norm * rec.step_norm +
                           kDescentSlack * (1.0 + std::abs(F_prev));
    violated = rec.F > allowed;
  }

  if (!norm_warned_ && x0_norm_ > 0.0 && x_next.norm() > kNormGrowthWarning * x0_norm_) {
    norm_warned_ = true;
    log::info("iterate norm grew by more than 1e6x from the starting point at cycle " +
              std::to_string(rec.cycle) + "; boundedness of the iterates is in doubt");
  }

  const double step_norm = rec.step_norm;
  const double elapsed = rec.elapsed_s;
  log_.records.push_back(std::move(rec));

  if (violated) {
    log_.status = RunStatus::descent_violation;
    log_.violation_cycle = log_.records.size();
    std::ostringstream msg;
    msg << log_.solver << ": descent violated at cycle " << log_.records.size();
    log::error(msg.str());
    stopped_ = true;
  } else if (step_norm <= step_tol_) {
    log_.status = RunStatus::converged;
    stopped_ = true;
  } else if (log_.records.size() >= config_.max_cycles ||
             (config_.time_budget_s && elapsed >= *config_.time_budget_s)) {
    log_.status = RunStatus::budget_exhausted;
    stopped_ = true;
  }
  return !stopped_;
}

RunLog RunRecorder::finish(Point x_final) {
  if (!std::isfinite(log_.eta_min)) {
    log_.eta_min = 0.0;
  }
  if (!stopped_) {
    log_.status = RunStatus::budget_exhausted;
  }
  StationarityConstants k;
  k.N = log_.num_blocks;
  k.H_F_max = log_.H_F_max;
  k.H_psi_max = problem_.psi_hessian_bound(log_.max_norm);
  if (auto L = problem_.gradient_lipschitz_bound(log_.max_norm)) {
    k.L = *L;
    log_.L_empirical = false;
  } else {
    k.L = empirical_L_;
    log_.L_empirical = true;
  }
  log_.constants = k;
  const auto bounds = stationarity_bound(log_, k);
  for (std::size_t j = 0; j < bounds.size(); ++j) {
    log_.records[j].stat_bound = bounds[j];
  }
  log_.x_final = std::move(x_final);
  return std::move(log_);
}

RunLog run_cpgd(const CompositeProblem& problem, const Point& x0, const SolverConfig& config) {
  config.validate();
  const auto& part = problem.partition();
  if (static_cast<std::size_t>(x0.size()) != part.dimension()) {
    throw std::invalid_argument("starting point dimension does not match the problem");
  }
  if (!problem.feasible(x0)) {
    throw std::invalid_argument("starting point is not feasible");
  }

  RunRecorder recorder(problem, x0, config, "cpgd");
  Point x = x0;
  bool keep_going = config.max_cycles > 0;
  while (keep_going) {
    const Point x_prev = x;
    std::vector<BlockStep> steps;
    steps.reserve(part.num_blocks());
    double eta_cycle = std::numeric_limits<double>::infinity();
    double max_norm = 0.0;
    for (std::size_t i = 0; i < part.num_blocks(); ++i) {
      auto upd = cpgd_block_update(problem, x, i, config);
      x = std::move(upd.x);
      eta_cycle = std::min(eta_cycle, 2.0 * upd.step.H_f - upd.step.L);
      max_norm = std::max(max_norm, x.norm());
      steps.push_back(upd.step);
    }
    keep_going = recorder.record_cycle(x_prev, x, std::move(steps), eta_cycle, max_norm);
  }
  return recorder.finish(std::move(x));
}

RunLog run_pgd_baseline(const CompositeProblem& problem, const Point& x0,
                        const SolverConfig& config) {
  config.validate();
  if (static_cast<std::size_t>(x0.size()) != problem.partition().dimension()) {
    throw std::invalid_argument("starting point dimension does not match the problem");
  }
  if (!problem.feasible(x0)) {
    throw std::invalid_argument("starting point is not feasible");
  }

  RunRecorder recorder(problem, x0, config, "pgd-baseline", 1);
  Point x = x0;
  double F = problem.value(x);
  // Initial step from a curvature probe along -grad; afterwards the accepted
  // step is doubled before each backtracking search.
  double t = 0.0;
  bool keep_going = config.max_cycles > 0;
  while (keep_going) {
    const Vector grad = problem.h_grad(x);
    if (!all_finite(grad)) {
      throw SolverError("non-finite gradient in baseline");
    }
    if (t == 0.0) {
      t = 1.0;
      const double gn = grad.norm();
      if (gn > 0.0) {
        const double s = 1e-4 * std::max(1.0, x.norm()) / gn;
        const double curv = (problem.h_grad(x - s * grad) - grad).norm() / (s * gn);
        if (std::isfinite(curv) && curv > 0.0) {
          t = 1.0 / curv;
        }
      }
    } else {
      t = std::min(2.0 * t, kBaselineMaxStep);
    }
    Point trial;
    double F_trial = 0.0;
    while (true) {
      trial = project_all(problem, x - t * grad);
      F_trial = problem.value(trial);
      const double dist2 = (trial - x).squaredNorm();
      if (std::isfinite(F_trial) && F_trial <= F - dist2 / (2.0 * t)) {
        break;
      }
      t *= 0.5;
      if (t < kBacktrackFloor) {
        throw SolverError("baseline backtracking floor reached");
      }
    }
    BlockStep step;
    step.alpha = t * grad.norm();
    step.H_F = 1.0 / t;
    step.H_f = 1.0 / t;
    step.L = 1.0 / t;  // reported margin 2 H_f - L equals the Armijo coefficient 1/t
    step.grad_norm = grad.norm();
    step.d_norm = (trial - x).norm();
    const Point x_prev = x;
    x = std::move(trial);
    F = F_trial;
    keep_going = recorder.record_cycle(x_prev, x, {step}, 1.0 / t, x.norm());
  }
  return recorder.finish(std::move(x));
}

}  // namespace cpgd
