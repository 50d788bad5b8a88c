#pragma once

#include <cstdint>
#include <utility>

#include "cpgd/problem.hpp"
#include "cpgd/solver.hpp"

namespace cpgd::onmf {

/// Penalized orthogonal NMF:
///   min_{W >= 0, V >= 0} 1/2 ||X - W V||_F^2 + lambda/2 ||I - V V^T||_F^2
/// with X of size m x n, W of size m x r and V of size r x n.
struct Instance {
  Matrix X;
  int r = 1;
  double lambda = 1.0;

  void validate() const;
};

struct State {
  Matrix W;
  Matrix V;
};

double objective(const Instance& inst, const State& s);

// 1/2 ||X - W V||_F^2
double fit_value(const Instance& inst, const State& s);
// lambda/2 ||I - V V^T||_F^2
double penalty_value(const Instance& inst, const Matrix& V);

/// grad_W f = W V V^T - X V^T
Matrix grad_W(const Instance& inst, const State& s);
/// grad_V f = W^T W V - W^T X
Matrix grad_V_fit(const Instance& inst, const State& s);
/// grad_V psi = 2 lambda (V V^T V - V)
Matrix grad_V_penalty(const Instance& inst, const Matrix& V);
/// grad_V (f + psi)
Matrix grad_V(const Instance& inst, const State& s);

/// hess_VV psi [Z] = 2 lambda (Z V^T V + V Z^T V + V V^T Z - Z)
Matrix penalty_hessian_apply(const Instance& inst, const Matrix& V, const Matrix& Z);

struct LipschitzPair {
  double L1 = 0.0;  // ||V V^T||_F, modulus of grad_W f
  double L2 = 0.0;  // ||W^T W||_F, modulus of grad_V f
};

LipschitzPair lipschitz_constants(const State& s);

/// ||I - V V^T||_F
double orthogonality_error(const Matrix& V);

/// ||X - W V||_F^2
double fit_residual(const Instance& inst, const State& s);

// The V block sees p = 2 and H_psi = 6 lambda; the W block has H_psi = 0.
inline constexpr int kPenaltyDegree = 2;
inline double penalty_growth(double lambda) { return 6.0 * lambda; }

struct CycleDiag {
  double alpha_W = 0.0;
  double H_f_W = 0.0;
  double L1 = 0.0;
  double grad_norm_W = 0.0;
  double d_norm_W = 0.0;

  double alpha_V = 0.0;           // closed-form cubic root (used for the step)
  double alpha_V_generic = 0.0;   // same root from the generic stepsize solver
  double H_f_V = 0.0;
  double H_F_V = 0.0;
  double L2 = 0.0;
  double grad_norm_V = 0.0;
  double d_norm_V = 0.0;
};

/// One CPGD cycle in matrix form: W step with 1/H_f,W then clamp, followed
/// by the V step with H_F = 12 lambda ||V||_F^2 + 12 lambda alpha^2 + H_f,V
/// where alpha is the positive root of
///   12 lambda a^3 + (12 lambda ||V||_F^2 + H_f,V) a = ||grad_V (f + psi)||_F.
std::pair<State, CycleDiag> cpgd_onmf_cycle(const Instance& inst, const State& s,
                                            const SolverConfig& config);

/// Noiseless-or-noisy planted instance. V has one nonzero per column, rows
/// with disjoint supports normalized so that V V^T = I; W is uniform(0, 1];
/// X = W V + noise * |N(0, 1)|.
std::pair<Instance, State> synthetic_instance(int m, int n, int r, double noise_level,
                                              std::uint64_t seed, double lambda = 10.0);

/// Entrywise uniform(0, 1] starting factors.
State random_state(int m, int n, int r, std::uint64_t seed);

/// Whether the stepsize polynomial of the V block uses ||V||_F (matrix-form
/// convention) or the norm of the whole stacked iterate (W, V).
enum class NormConvention { v_block, joint };

/// The ONMF objective seen by the generic block solver: x = [vec(W); vec(V)]
/// (column-major), blocks of sizes m*r and r*n, Q = nonnegative orthant.
class Problem final : public CompositeProblem {
 public:
  Problem(Instance inst, NormConvention convention = NormConvention::joint);

  const BlockPartition& partition() const override { return partition_; }
  double f_value(const Point& x) const override;
  double psi_value(const Point& x) const override;
  Vector h_partial_grad(const Point& x, std::size_t i) const override;
  Vector h_grad(const Point& x) const override;
  double block_lipschitz(const Point& x, std::size_t i) const override;
  HessianGrowth hessian_growth(std::size_t i) const override;
  Vector project_block(const Vector& v, std::size_t i) const override;
  bool feasible(const Point& x) const override;
  double stepsize_norm(const Point& x, std::size_t i) const override;
  std::optional<double> gradient_lipschitz_bound(double radius) const override;
  double psi_hessian_bound(double radius) const override;
  std::optional<BoxBounds> box() const override;
  std::map<std::string, double> metrics(const Point& x) const override;

  const Instance& instance() const { return inst_; }
  Point pack(const State& s) const;
  State unpack(const Point& x) const;

 private:
  Instance inst_;
  NormConvention convention_;
  BlockPartition partition_;
  Eigen::Index m_, n_;
  double x_norm_f_;
};

/// Runs cpgd_onmf_cycle until the stopping rule; the log has the generic
/// solver's schema plus `ortho_error` and `fit_residual` metrics.
RunLog run_cpgd_onmf(const Instance& inst, const State& s0, const SolverConfig& config);

}  // namespace cpgd::onmf
