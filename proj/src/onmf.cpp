#include "cpgd/onmf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include "cpgd/stepsize.hpp"

namespace cpgd::onmf {
namespace {

void check_shapes(const Instance& inst, const State& s) {
  if (s.W.rows() != inst.X.rows() || s.W.cols() != inst.r || s.V.rows() != inst.r ||
      s.V.cols() != inst.X.cols()) {
    throw std::invalid_argument("ONMF factor shapes do not match the instance");
  }
}

Matrix identity_minus_gram(const Matrix& V) {
  return Matrix::Identity(V.rows(), V.rows()) - V * V.transpose();
}

}  // namespace

void Instance::validate() const {
  if (r < 1) {
    throw std::invalid_argument("ONMF rank must be >= 1");
  }
  if (r > std::min(X.rows(), X.cols())) {
    throw std::invalid_argument("ONMF rank exceeds min(m, n)");
  }
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument("ONMF penalty weight must be positive");
  }
  if (!X.allFinite()) {
    throw std::invalid_argument("data matrix has non-finite entries");
  }
  if ((X.array() < 0.0).any()) {
    throw std::invalid_argument("data matrix must be nonnegative");
  }
}

double fit_value(const Instance& inst, const State& s) {
  check_shapes(inst, s);
  return 0.5 * (inst.X - s.W * s.V).squaredNorm();
}

double penalty_value(const Instance& inst, const Matrix& V) {
  return 0.5 * inst.lambda * identity_minus_gram(V).squaredNorm();
}

double objective(const Instance& inst, const State& s) {
  return fit_value(inst, s) + penalty_value(inst, s.V);
}

Matrix grad_W(const Instance& inst, const State& s) {
  check_shapes(inst, s);
  return s.W * (s.V * s.V.transpose()) - inst.X * s.V.transpose();
}

Matrix grad_V_fit(const Instance& inst, const State& s) {
  check_shapes(inst, s);
  return (s.W.transpose() * s.W) * s.V - s.W.transpose() * inst.X;
}

Matrix grad_V_penalty(const Instance& inst, const Matrix& V) {
  return 2.0 * inst.lambda * ((V * V.transpose()) * V - V);
}

Matrix grad_V(const Instance& inst, const State& s) {
  return grad_V_fit(inst, s) + grad_V_penalty(inst, s.V);
}

Matrix penalty_hessian_apply(const Instance& inst, const Matrix& V, const Matrix& Z) {
  return 2.0 * inst.lambda *
         (Z * (V.transpose() * V) + V * (Z.transpose() * V) + (V * V.transpose()) * Z - Z);
}

LipschitzPair lipschitz_constants(const State& s) {
  return {(s.V * s.V.transpose()).norm(), (s.W.transpose() * s.W).norm()};
}

double orthogonality_error(const Matrix& V) { return identity_minus_gram(V).norm(); }

double fit_residual(const Instance& inst, const State& s) {
  check_shapes(inst, s);
  return (inst.X - s.W * s.V).squaredNorm();
}

std::pair<State, CycleDiag> cpgd_onmf_cycle(const Instance& inst, const State& s,
                                            const SolverConfig& config) {
  check_shapes(inst, s);
  CycleDiag d;
  State next;

  // W block: psi does not depend on W, so H_F = H_f,W and alpha = |grad| / H_f.
  d.L1 = (s.V * s.V.transpose()).norm();
  d.H_f_W = std::max(config.eta_multiplier * d.L1, config.hf_floor);
  const Matrix gW = grad_W(inst, s);
  d.grad_norm_W = gW.norm();
  d.alpha_W = d.grad_norm_W / d.H_f_W;
  next.W = (s.W - gW / d.H_f_W).cwiseMax(0.0);
  d.d_norm_W = (next.W - s.W).norm();

  // V block, evaluated at (W_{k+1}, V_k).
  const State mid{next.W, s.V};
  d.L2 = (next.W.transpose() * next.W).norm();
  d.H_f_V = std::max(config.eta_multiplier * d.L2, config.hf_floor);
  const Matrix gV = grad_V(inst, mid);
  if (!gW.allFinite() || !gV.allFinite()) {
    throw SolverError("non-finite ONMF gradient");
  }
  d.grad_norm_V = gV.norm();

  const double v_norm2 = s.V.squaredNorm();
  const double a = 2.0 * penalty_growth(inst.lambda);  // 2^(p-1) H_psi with p = 2
  const double c = a * v_norm2 + d.H_f_V;
  d.alpha_V = d.grad_norm_V < kGradUnderflow ? 0.0 : cubic_root_closed_form(a, c, d.grad_norm_V);

  StepsizePolyParams params;
  params.p = kPenaltyDegree;
  params.H_psi = penalty_growth(inst.lambda);
  params.x_norm = std::sqrt(v_norm2);
  params.H_f = d.H_f_V;
  params.grad_norm = d.grad_norm_V;
  d.alpha_V_generic = solve_stepsize_poly(params, config.root_tol);

  d.H_F_V = a * v_norm2 + a * d.alpha_V * d.alpha_V + d.H_f_V;
  next.V = (s.V - gV / d.H_F_V).cwiseMax(0.0);
  d.d_norm_V = (next.V - s.V).norm();
  return {std::move(next), d};
}

std::pair<Instance, State> synthetic_instance(int m, int n, int r, double noise_level,
                                              std::uint64_t seed, double lambda) {
  if (m < 1 || n < 1 || r < 1 || r > std::min(m, n)) {
    throw std::invalid_argument("synthetic ONMF instance needs 1 <= r <= min(m, n)");
  }
  if (!(noise_level >= 0.0)) {
    throw std::invalid_argument("noise level must be nonnegative");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  // Column j of V is supported on row owner[j]; every row owns at least one column.
  std::vector<int> owner(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    owner[static_cast<std::size_t>(j)] = j % r;
  }
  std::shuffle(owner.begin(), owner.end(), rng);

  State planted;
  planted.V = Matrix::Zero(r, n);
  for (int j = 0; j < n; ++j) {
    planted.V(owner[static_cast<std::size_t>(j)], j) = 0.1 + 0.9 * unif(rng);
  }
  for (int row = 0; row < r; ++row) {
    planted.V.row(row) /= planted.V.row(row).norm();
  }
  planted.W.resize(m, r);
  for (int j = 0; j < r; ++j) {
    for (int i = 0; i < m; ++i) {
      planted.W(i, j) = 1.0 - unif(rng);
    }
  }

  Instance inst;
  inst.r = r;
  inst.lambda = lambda;
  inst.X = planted.W * planted.V;
  if (noise_level > 0.0) {
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < m; ++i) {
        inst.X(i, j) += noise_level * std::abs(normal(rng));
      }
    }
  }
  inst.X = inst.X.cwiseMax(0.0);
  return {std::move(inst), std::move(planted)};
}

State random_state(int m, int n, int r, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  State s;
  s.W.resize(m, r);
  s.V.resize(r, n);
  for (int j = 0; j < r; ++j) {
    for (int i = 0; i < m; ++i) {
      s.W(i, j) = 1.0 - unif(rng);
    }
  }
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < r; ++i) {
      s.V(i, j) = 1.0 - unif(rng);
    }
  }
  return s;
}

// ---------------------------------------------------------------------------
// Generic-solver view

Problem::Problem(Instance inst, NormConvention convention)
    : inst_(std::move(inst)),
      convention_(convention),
      partition_(make_partition(static_cast<std::size_t>(inst_.X.rows() * inst_.r +
                                                         inst_.r * inst_.X.cols()),
                                {static_cast<std::size_t>(inst_.X.rows() * inst_.r),
                                 static_cast<std::size_t>(inst_.r * inst_.X.cols())})),
      m_(inst_.X.rows()),
      n_(inst_.X.cols()),
      x_norm_f_(inst_.X.norm()) {
  inst_.validate();
}

Point Problem::pack(const State& s) const {
  Point x(m_ * inst_.r + inst_.r * n_);
  x.head(m_ * inst_.r) = s.W.reshaped();
  x.tail(inst_.r * n_) = s.V.reshaped();
  return x;
}

State Problem::unpack(const Point& x) const {
  State s;
  s.W = x.head(m_ * inst_.r).reshaped(m_, inst_.r);
  s.V = x.tail(inst_.r * n_).reshaped(inst_.r, n_);
  return s;
}

double Problem::f_value(const Point& x) const { return fit_value(inst_, unpack(x)); }

double Problem::psi_value(const Point& x) const {
  return penalty_value(inst_, x.tail(inst_.r * n_).reshaped(inst_.r, n_));
}

Vector Problem::h_partial_grad(const Point& x, std::size_t i) const {
  const State s = unpack(x);
  if (i == 0) {
    return grad_W(inst_, s).reshaped();
  }
  if (i == 1) {
    return grad_V(inst_, s).reshaped();
  }
  throw std::out_of_range("ONMF problem has two blocks");
}

Vector Problem::h_grad(const Point& x) const {
  const State s = unpack(x);
  Vector g(x.size());
  g.head(m_ * inst_.r) = grad_W(inst_, s).reshaped();
  g.tail(inst_.r * n_) = grad_V(inst_, s).reshaped();
  return g;
}

double Problem::block_lipschitz(const Point& x, std::size_t i) const {
  const auto lip = lipschitz_constants(unpack(x));
  if (i == 0) return lip.L1;
  if (i == 1) return lip.L2;
  throw std::out_of_range("ONMF problem has two blocks");
}

HessianGrowth Problem::hessian_growth(std::size_t i) const {
  if (i == 0) return {kPenaltyDegree, 0.0};
  if (i == 1) return {kPenaltyDegree, penalty_growth(inst_.lambda)};
  throw std::out_of_range("ONMF problem has two blocks");
}

Vector Problem::project_block(const Vector& v, std::size_t /*i*/) const { return v.cwiseMax(0.0); }

bool Problem::feasible(const Point& x) const {
  return x.size() == static_cast<Eigen::Index>(partition_.dimension()) &&
         (x.array() >= 0.0).all();
}

double Problem::stepsize_norm(const Point& x, std::size_t i) const {
  if (convention_ == NormConvention::v_block && i == 1) {
    return x.tail(inst_.r * n_).norm();
  }
  return x.norm();
}

std::optional<double> Problem::gradient_lipschitz_bound(double radius) const {
  // Over ||(W, V)|| <= R every Hessian term of f is bounded by R^2 or
  // ||W V - X|| <= R^2 + ||X||, giving sqrt(2) (3 R^2 + ||X||).
  return std::sqrt(2.0) * (3.0 * radius * radius + x_norm_f_);
}

double Problem::psi_hessian_bound(double radius) const {
  return 2.0 * inst_.lambda * (3.0 * radius * radius + 1.0);
}

std::optional<BoxBounds> Problem::box() const {
  const auto n = static_cast<Eigen::Index>(partition_.dimension());
  return BoxBounds{Vector::Zero(n), Vector::Constant(n, std::numeric_limits<double>::infinity())};
}

std::map<std::string, double> Problem::metrics(const Point& x) const {
  const State s = unpack(x);
  return {{"fit_residual", fit_residual(inst_, s)}, {"ortho_error", orthogonality_error(s.V)}};
}

RunLog run_cpgd_onmf(const Instance& inst, const State& s0, const SolverConfig& config) {
  config.validate();
  inst.validate();
  check_shapes(inst, s0);
  if ((s0.W.array() < 0.0).any() || (s0.V.array() < 0.0).any()) {
    throw std::invalid_argument("ONMF starting factors must be nonnegative");
  }
  const Problem view(inst, NormConvention::v_block);
  RunRecorder recorder(view, view.pack(s0), config, "cpgd");

  State s = s0;
  bool keep_going = config.max_cycles > 0;
  while (keep_going) {
    auto [next, d] = cpgd_onmf_cycle(inst, s, config);
    BlockStep w{d.alpha_W, d.H_f_W, d.H_f_W, d.L1, d.grad_norm_W, d.d_norm_W};
    BlockStep v{d.alpha_V, d.H_F_V, d.H_f_V, d.L2, d.grad_norm_V, d.d_norm_V};
    const double eta_cycle = std::min(2.0 * d.H_f_W - d.L1, 2.0 * d.H_f_V - d.L2);
    const double mid_norm = std::sqrt(next.W.squaredNorm() + s.V.squaredNorm());
    const double end_norm = std::sqrt(next.W.squaredNorm() + next.V.squaredNorm());
    const Point x_prev = view.pack(s);
    const Point x_next = view.pack(next);
    s = std::move(next);
    keep_going = recorder.record_cycle(x_prev, x_next, {w, v}, eta_cycle,
                                       std::max(mid_norm, end_norm));
  }
  return recorder.finish(view.pack(s));
}

}  // namespace cpgd::onmf
