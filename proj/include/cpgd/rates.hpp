#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "cpgd/solver.hpp"

namespace cpgd::rates {

/// Positive sequence with Delta_k - Delta_{k+1} >= c Delta_{k+1}^(alpha+1),
/// simulated with equality.
struct RecurrenceSpec {
  double delta0 = 1.0;
  double c = 1.0;
  double alpha = 0.0;
  std::size_t K = 100;

  void validate() const;
};

/// Delta_0..Delta_K where each Delta_{k+1} is the positive root of
/// D + c D^(alpha+1) = Delta_k. Requires alpha > -1 so the left side is
/// strictly increasing. The sequence stops early (fewer than K+1 entries)
/// once the next term would fall below the smallest normal double.
std::vector<double> simulate_recurrence(const RecurrenceSpec& spec);

enum class Regime { sublinear, linear, superlinear, inconclusive };

std::string to_string(Regime regime);

struct BoundCheck {
  Regime regime = Regime::inconclusive;
  std::vector<double> bound;   // right-hand side at each k
  std::vector<double> margin;  // (bound - Delta_k) / bound
  std::vector<bool> holds;

  bool all_hold() const;
};

/// Checks the per-regime decay bounds at every index:
///   0 < alpha < 1:  Delta_k <= Delta_0 / (1 + (alpha k / (1 + alpha)) ln(1 + Delta_0^alpha))^(1/alpha)
///   alpha = 0:      Delta_k <= (1 / (1 + c))^k Delta_0
///   -1 < alpha < 0: Delta_{k+1} <= Delta_k / (1 + c Delta_{k+1}^alpha)
/// The sublinear bound is stated for c = 1; other c are handled by rescaling
/// Delta by c^(1/alpha), under which the recurrence takes the c = 1 form.
/// A bound holds when Delta_k <= bound * (1 + rel_slack).
BoundCheck check_rate_bounds(std::span<const double> seq, double c, double alpha,
                             double rel_slack = 1e-10);

/// D = eta_min / (2 C) with C the stationarity constant.
double compute_D(double eta_min, std::size_t N, double L, double H_psi_max, double H_F_max);

/// Upper bound on F(x_k) - F_* under the KL inequality with exponent q:
///   1 < q < 2: gap0 / (1 + ((2-q)/2) k ln(1 + D sigma^(-2/q) gap0^((2-q)/q)))^(q/(2-q))
///   q = 2:     (sigma / (sigma + D))^k gap0
///   q > 2:     k steps of the implicit contraction gap_{j+1} = gap_j * superlinear_factor(gap_{j+1})
double kl_rate_bound(double q, double sigma_q, double D, double gap0, std::size_t k);

/// 1 / (1 + D sigma^(-2/q) gap^((2-q)/q)), the one-step factor of the q > 2 regime.
double superlinear_factor(double q, double sigma_q, double D, double gap);

/// How F_* is chosen when fitting the KL exponent.
enum class FStarMode {
  final_value,  // last logged F
  extrapolate,  // fitted jointly with (q, sigma) from the tail
  known,        // supplied by the caller
};

struct FitOptions {
  double tail_fraction = 0.5;
  FStarMode f_star_mode = FStarMode::final_value;
  double f_star = 0.0;  // used with FStarMode::known
  // Fits whose RMS log residual exceeds this are reported inconclusive.
  double max_log_residual = 0.25;
};

struct RateFit {
  double q = 0.0;
  double sigma_q = 0.0;
  Regime regime = Regime::inconclusive;
  double D = 0.0;
  double goodness = 0.0;  // RMS residual of the log-log regression
  double f_star = 0.0;
  std::size_t points = 0;
  std::string note;
};

/// q in (1, 1.85) sublinear, |q - 2| <= 0.15 linear, q > 2.15 superlinear,
/// anything at or below 1 inconclusive.
Regime classify_exponent(double q);

/// Regresses log(F_k - F_*) on log(stat_bound_k) over the last tail_fraction
/// of the cycles. Needs at least 20 cycles; gaps lost in floating-point
/// noise around F_* are discarded.
RateFit fit_kl_exponent(const RunLog& log, const FitOptions& options = {});

/// key: value lines.
void write_report(std::ostream& os, const RateFit& fit);

/// k,bound rows of kl_rate_bound for k = 0..K.
void write_bounds_csv(std::ostream& os, double q, double sigma_q, double D, double gap0,
                      std::size_t K);

}  // namespace cpgd::rates
