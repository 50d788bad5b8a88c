#pragma once

#include <map>
#include <optional>
#include <string>

#include "cpgd/blocks.hpp"

namespace cpgd {

/// Polynomial growth of the block Hessians of psi:
/// ||U_i^T hess(psi)(y) U_i|| <= H_psi ||y||^p.
struct HessianGrowth {
  int p = 1;
  double H_psi = 0.0;
};

/// Coordinate bounds of a box-shaped feasible set (entries may be +-inf).
struct BoxBounds {
  Vector lower;
  Vector upper;
};

/// Composite objective F = f + psi + phi where phi is the indicator of a
/// block-separable closed convex set Q = Q_1 x ... x Q_N.
///
/// Implementations must be safe for concurrent const calls.
class CompositeProblem {
 public:
  virtual ~CompositeProblem() = default;

  virtual const BlockPartition& partition() const = 0;

  virtual double f_value(const Point& x) const = 0;
  virtual double psi_value(const Point& x) const = 0;

  /// U_i^T grad h(x) with h = f + psi.
  virtual Vector h_partial_grad(const Point& x, std::size_t i) const = 0;

  /// L_i(x^{!=i}): Lipschitz modulus of the block-i partial gradient of f.
  virtual double block_lipschitz(const Point& x, std::size_t i) const = 0;

  virtual HessianGrowth hessian_growth(std::size_t i) const = 0;

  /// Euclidean projection of a block vector onto Q_i.
  virtual Vector project_block(const Vector& v, std::size_t i) const = 0;

  virtual bool feasible(const Point& x) const = 0;

  /// Norm entering the stepsize polynomial at block i. Defaults to the
  /// full-vector norm of the current (partially updated) iterate.
  virtual double stepsize_norm(const Point& x, std::size_t /*i*/) const { return x.norm(); }

  /// Full gradient of h, assembled from the partial gradients by default.
  virtual Vector h_grad(const Point& x) const;

  /// Lipschitz constant of grad f over the ball of the given radius, when
  /// the problem can state one analytically.
  virtual std::optional<double> gradient_lipschitz_bound(double /*radius*/) const {
    return std::nullopt;
  }

  /// Bound on max_i ||U_i^T hess(psi)(y)|| over the ball of the given radius.
  /// The default uses the growth constants, which is exact when psi has no
  /// cross-block curvature; problems with coupled psi should override.
  virtual double psi_hessian_bound(double radius) const;

  /// Set when Q is a box; enables the direct stationarity residual.
  virtual std::optional<BoxBounds> box() const { return std::nullopt; }

  /// Problem-specific quantities logged every cycle as `metric:<name>`.
  virtual std::map<std::string, double> metrics(const Point& /*x*/) const { return {}; }

  double value(const Point& x) const { return f_value(x) + psi_value(x); }
};

/// dist(0, grad h(x) + N_Q(x)) for a box Q, i.e. the exact stationarity
/// measure S_F(x). Requires x in Q.
double box_stationarity_residual(const Vector& grad, const Point& x, const BoxBounds& box);

/// Clamp of v onto [lower, upper] restricted to block i.
Vector clamp_block(const Vector& v, std::size_t i, const BoxBounds& box,
                   const BlockPartition& partition);

bool within_box(const Point& x, const BoxBounds& box);

}  // namespace cpgd
