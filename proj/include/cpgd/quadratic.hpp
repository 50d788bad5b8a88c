#pragma once

#include <cstdint>
#include <vector>

#include "cpgd/problem.hpp"

namespace cpgd {

/// F(x) = 1/2 x^T A x - b^T x + c0 + (mu/4)(||x||^2 - 1)^2 over a box.
///
/// A is symmetric positive semidefinite. The quartic term is nonseparable
/// whenever mu > 0 and has <z, hess z> <= 3 mu ||x||^2 ||z||^2, so it enters
/// the stepsize rule with p = 2 and H_psi = 3 mu.
class QuadraticBoxProblem final : public CompositeProblem {
 public:
  QuadraticBoxProblem(Matrix A, Vector b, double c0, double mu, BoxBounds box,
                      BlockPartition partition);

  const BlockPartition& partition() const override { return partition_; }
  double f_value(const Point& x) const override;
  double psi_value(const Point& x) const override;
  Vector h_partial_grad(const Point& x, std::size_t i) const override;
  Vector h_grad(const Point& x) const override;
  double block_lipschitz(const Point& x, std::size_t i) const override;
  HessianGrowth hessian_growth(std::size_t i) const override;
  Vector project_block(const Vector& v, std::size_t i) const override;
  bool feasible(const Point& x) const override;
  std::optional<double> gradient_lipschitz_bound(double radius) const override;
  double psi_hessian_bound(double radius) const override;
  std::optional<BoxBounds> box() const override { return box_; }

  const Matrix& A() const { return A_; }
  const Vector& b() const { return b_; }
  double mu() const { return mu_; }

 private:
  Matrix A_;
  Vector b_;
  double c0_;
  double mu_;
  BoxBounds box_;
  BlockPartition partition_;
  std::vector<double> block_L_;
  double full_L_ = 0.0;
};

/// f(x) = 1/2 ||x - (2, -3)||^2 on the nonnegative orthant, two singleton
/// blocks. Minimizer (2, 0), optimal value 4.5.
QuadraticBoxProblem toy_quadratic();

/// Random instance: A = M^T M / n + shift I (diagonal when `separable`),
/// b ~ 2 N(0, 1), box [-1, 1]^n, contiguous blocks of the given sizes.
QuadraticBoxProblem random_quadratic(std::size_t n, const std::vector<std::size_t>& block_sizes,
                                     double mu, bool separable, std::uint64_t seed);

}  // namespace cpgd
