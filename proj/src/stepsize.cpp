#include "cpgd/stepsize.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace cpgd {
namespace {

constexpr int kMaxRootIterations = 200;

double leading_coeff(const StepsizePolyParams& s) {
  return std::ldexp(s.H_psi, s.p - 1);  // 2^(p-1) H_psi
}

double linear_coeff(const StepsizePolyParams& s) {
  return leading_coeff(s) * std::pow(s.x_norm, s.p) + s.H_f;
}

}  // namespace

void StepsizePolyParams::validate() const {
  if (p < 1) {
    throw std::invalid_argument("stepsize exponent p must be an integer >= 1, got " +
                                std::to_string(p));
  }
  if (!std::isfinite(H_psi) || !std::isfinite(x_norm) || !std::isfinite(H_f) ||
      !std::isfinite(grad_norm)) {
    throw std::invalid_argument("stepsize parameters must be finite");
  }
  if (!(H_f > 0.0)) {
    throw std::invalid_argument("H_f must be positive");
  }
  if (H_psi < 0.0 || x_norm < 0.0 || grad_norm < 0.0) {
    throw std::invalid_argument("H_psi, x_norm and grad_norm must be nonnegative");
  }
}

double stepsize_poly(const StepsizePolyParams& params, double alpha) {
  return leading_coeff(params) * std::pow(alpha, params.p + 1) + linear_coeff(params) * alpha -
         params.grad_norm;
}

double solve_stepsize_poly(const StepsizePolyParams& params, double tol) {
  params.validate();
  if (!(tol > 0.0)) {
    throw std::invalid_argument("root tolerance must be positive");
  }
  if (params.grad_norm < kGradUnderflow) {
    return 0.0;
  }

  const double a = leading_coeff(params);
  const double c = linear_coeff(params);
  // Relative to grad_norm rather than max(1, grad_norm): since
  // alpha * g'(alpha) >= grad_norm, this bounds the relative root error by tol.
  const double target = tol * params.grad_norm;

  double lo = 0.0;
  double hi = params.grad_norm / c;  // g(hi) = a hi^(p+1) >= 0
  if (a == 0.0) {
    return hi;
  }

  // g is convex and increasing on [0, inf): Newton from the right end is
  // monotone. The bracket only matters if rounding pushes an iterate out.
  double alpha = hi;
  for (int it = 0; it < kMaxRootIterations; ++it) {
    const double g = stepsize_poly(params, alpha);
    if (std::abs(g) <= target) {
      return alpha;
    }
    if (g > 0.0) {
      hi = alpha;
    } else {
      lo = alpha;
    }
    const double slope = a * (params.p + 1) * std::pow(alpha, params.p) + c;
    double next = alpha - g / slope;
    if (!(next > lo && next < hi)) {
      next = 0.5 * (lo + hi);
    }
    if (next == alpha) {
      break;
    }
    alpha = next;
  }
  const double g = stepsize_poly(params, alpha);
  if (std::abs(g) <= target) {
    return alpha;
  }
  throw StepsizeError("stepsize root did not converge: residual " + std::to_string(g) +
                      " exceeds " + std::to_string(target));
}

double stepsize_HF(const StepsizePolyParams& params, double alpha) {
  const double a = leading_coeff(params);
  return a * std::pow(params.x_norm, params.p) + a * std::pow(alpha, params.p) + params.H_f;
}

StepsizeResult adaptive_stepsize(const StepsizePolyParams& params, double tol) {
  StepsizeResult out;
  out.alpha = solve_stepsize_poly(params, tol);
  out.H_F = stepsize_HF(params, out.alpha);
  out.residual = std::abs(stepsize_poly(params, out.alpha));
  return out;
}

double cubic_root_closed_form(double a, double c, double g) {
  if (!(a > 0.0) || !(c > 0.0) || !(g >= 0.0)) {
    throw std::invalid_argument("closed-form cubic needs a > 0, c > 0, g >= 0");
  }
  if (g == 0.0) {
    return 0.0;
  }
  // t^3 + P t - Q = 0 with P > 0 has the single real root
  //   t = 2 sqrt(P/3) sinh( asinh( (3Q / 2P) sqrt(3/P) ) / 3 ).
  const double P = c / a;
  const double Q = g / a;
  const double s = std::sqrt(P / 3.0);
  const double arg = (1.5 * Q / P) / s;
  return 2.0 * s * std::sinh(std::asinh(arg) / 3.0);
}

}  // namespace cpgd
