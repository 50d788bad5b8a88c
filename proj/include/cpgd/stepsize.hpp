#pragma once

#include <stdexcept>

namespace cpgd {

inline constexpr double kDefaultRootTol = 1e-12;

// Gradient norms below this are treated as exactly zero (alpha = 0).
inline constexpr double kGradUnderflow = 1e-300;

/// Inputs of the adaptive stepsize polynomial
///
///   g(a) = 2^(p-1) H_psi a^(p+1) + (2^(p-1) H_psi x_norm^p + H_f) a - grad_norm.
///
/// g is strictly increasing on [0, inf) with g(0) = -grad_norm <= 0, so it has
/// exactly one nonnegative root.
struct StepsizePolyParams {
  int p = 1;
  double H_psi = 0.0;
  double x_norm = 0.0;
  double H_f = 1.0;
  double grad_norm = 0.0;

  // Throws std::invalid_argument when the invariants do not hold.
  void validate() const;
};

struct StepsizeResult {
  double alpha = 0.0;
  double H_F = 0.0;
  double residual = 0.0;
  int iterations = 0;
};

/// Raised when the root iteration fails to reach the requested residual.
class StepsizeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

double stepsize_poly(const StepsizePolyParams& params, double alpha);

/// Unique nonnegative root of the stepsize polynomial, by Newton's method
/// safeguarded with bisection inside [0, grad_norm / H_f].
/// Post: |g(alpha)| <= tol * grad_norm, so alpha is within a relative tol
/// of the exact root.
double solve_stepsize_poly(const StepsizePolyParams& params, double tol = kDefaultRootTol);

/// H_F = 2^(p-1) H_psi x_norm^p + 2^(p-1) H_psi alpha^p + H_f.
/// For the root alpha this gives alpha * H_F = grad_norm.
double stepsize_HF(const StepsizePolyParams& params, double alpha);

/// Root, assembled H_F and residual in one call.
StepsizeResult adaptive_stepsize(const StepsizePolyParams& params, double tol = kDefaultRootTol);

/// Real root of the depressed cubic a*t^3 + c*t = g (a > 0, c > 0, g >= 0),
/// from the hyperbolic form of Cardano's formula.
double cubic_root_closed_form(double a, double c, double g);

}  // namespace cpgd
