#include "cpgd/quadratic.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace cpgd {
namespace {

double spectral_norm_sym(const Matrix& S) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(S, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

Matrix principal_block(const Matrix& A, const std::vector<std::size_t>& idx) {
  const auto k = static_cast<Eigen::Index>(idx.size());
  Matrix out(k, k);
  for (Eigen::Index r = 0; r < k; ++r) {
    for (Eigen::Index c = 0; c < k; ++c) {
      out(r, c) = A(static_cast<Eigen::Index>(idx[r]), static_cast<Eigen::Index>(idx[c]));
    }
  }
  return out;
}

}  // namespace

QuadraticBoxProblem::QuadraticBoxProblem(Matrix A, Vector b, double c0, double mu, BoxBounds box,
                                         BlockPartition partition)
    : A_(std::move(A)),
      b_(std::move(b)),
      c0_(c0),
      mu_(mu),
      box_(std::move(box)),
      partition_(std::move(partition)) {
  const auto n = static_cast<Eigen::Index>(partition_.dimension());
  if (A_.rows() != n || A_.cols() != n || b_.size() != n || box_.lower.size() != n ||
      box_.upper.size() != n) {
    throw std::invalid_argument("quadratic problem data does not match the partition");
  }
  if (!A_.isApprox(A_.transpose())) {
    throw std::invalid_argument("quadratic matrix must be symmetric");
  }
  if (mu_ < 0.0) {
    throw std::invalid_argument("quartic weight must be nonnegative");
  }
  if ((box_.lower.array() > box_.upper.array()).any()) {
    throw std::invalid_argument("box lower bound exceeds upper bound");
  }
  for (std::size_t i = 0; i < partition_.num_blocks(); ++i) {
    block_L_.push_back(spectral_norm_sym(principal_block(A_, partition_.indices(i))));
  }
  full_L_ = spectral_norm_sym(A_);
}

double QuadraticBoxProblem::f_value(const Point& x) const {
  return 0.5 * x.dot(A_ * x) - b_.dot(x) + c0_;
}

double QuadraticBoxProblem::psi_value(const Point& x) const {
  const double s = x.squaredNorm() - 1.0;
  return 0.25 * mu_ * s * s;
}

Vector QuadraticBoxProblem::h_grad(const Point& x) const {
  return A_ * x - b_ + mu_ * (x.squaredNorm() - 1.0) * x;
}

Vector QuadraticBoxProblem::h_partial_grad(const Point& x, std::size_t i) const {
  const auto& idx = partition_.indices(i);
  const double scale = mu_ * (x.squaredNorm() - 1.0);
  Vector g(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) {
    const auto row = static_cast<Eigen::Index>(idx[j]);
    g[static_cast<Eigen::Index>(j)] = A_.row(row).dot(x) - b_[row] + scale * x[row];
  }
  return g;
}

double QuadraticBoxProblem::block_lipschitz(const Point& /*x*/, std::size_t i) const {
  return block_L_.at(i);
}

HessianGrowth QuadraticBoxProblem::hessian_growth(std::size_t /*i*/) const {
  return {2, 3.0 * mu_};
}

Vector QuadraticBoxProblem::project_block(const Vector& v, std::size_t i) const {
  return clamp_block(v, i, box_, partition_);
}

bool QuadraticBoxProblem::feasible(const Point& x) const { return within_box(x, box_); }

std::optional<double> QuadraticBoxProblem::gradient_lipschitz_bound(double /*radius*/) const {
  return full_L_;
}

double QuadraticBoxProblem::psi_hessian_bound(double radius) const {
  // Eigenvalues of mu((|x|^2 - 1) I + 2 x x^T) lie in [-mu, 3 mu |x|^2 - mu].
  return mu_ * (3.0 * radius * radius + 1.0);
}

QuadraticBoxProblem toy_quadratic() {
  const double inf = std::numeric_limits<double>::infinity();
  Vector b(2);
  b << 2.0, -3.0;
  BoxBounds box{Vector::Zero(2), Vector::Constant(2, inf)};
  return QuadraticBoxProblem(Matrix::Identity(2, 2), b, 0.5 * b.squaredNorm(), 0.0, box,
                             make_partition(2, {1, 1}));
}

QuadraticBoxProblem random_quadratic(std::size_t n, const std::vector<std::size_t>& block_sizes,
                                     double mu, bool separable, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto dim = static_cast<Eigen::Index>(n);
  Matrix A;
  if (separable) {
    std::uniform_real_distribution<double> diag(0.5, 3.0);
    A = Matrix::Zero(dim, dim);
    for (Eigen::Index j = 0; j < dim; ++j) {
      A(j, j) = diag(rng);
    }
  } else {
    Matrix M(dim, dim);
    for (Eigen::Index r = 0; r < dim; ++r) {
      for (Eigen::Index c = 0; c < dim; ++c) {
        M(r, c) = normal(rng);
      }
    }
    A = M.transpose() * M / static_cast<double>(n) + 0.1 * Matrix::Identity(dim, dim);
    A = 0.5 * (A + A.transpose()).eval();
  }
  Vector b(dim);
  for (Eigen::Index j = 0; j < dim; ++j) {
    b[j] = 2.0 * normal(rng);
  }
  BoxBounds box{Vector::Constant(dim, -1.0), Vector::Constant(dim, 1.0)};
  return QuadraticBoxProblem(std::move(A), std::move(b), 0.0, mu, std::move(box),
                             make_partition(n, std::span<const std::size_t>(block_sizes)));
}

}  // namespace cpgd
