#include "cpgd/problem.hpp"

#include <algorithm>
#include <cmath>

namespace cpgd {

Vector CompositeProblem::h_grad(const Point& x) const {
  const auto& part = partition();
  Vector g = Vector::Zero(x.size());
  for (std::size_t i = 0; i < part.num_blocks(); ++i) {
    assign_block(g, i, h_partial_grad(x, i), part);
  }
  return g;
}

double CompositeProblem::psi_hessian_bound(double radius) const {
  double bound = 0.0;
  for (std::size_t i = 0; i < partition().num_blocks(); ++i) {
    const auto growth = hessian_growth(i);
    bound = std::max(bound, growth.H_psi * std::pow(radius, growth.p));
  }
  return bound;
}

double box_stationarity_residual(const Vector& grad, const Point& x, const BoxBounds& box) {
  // Normal cone of a box: (-inf, 0] at an active lower bound, [0, inf) at an
  // active upper bound, {0} in the interior.
  double sq = 0.0;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    double r = grad[j];
    const bool at_lower = x[j] <= box.lower[j];
    const bool at_upper = x[j] >= box.upper[j];
    if (at_lower && at_upper) {
      r = 0.0;
    } else if (at_lower) {
      r = std::min(r, 0.0);
    } else if (at_upper) {
      r = std::max(r, 0.0);
    }
    sq += r * r;
  }
  return std::sqrt(sq);
}

Vector clamp_block(const Vector& v, std::size_t i, const BoxBounds& box,
                   const BlockPartition& partition) {
  return v.cwiseMax(extract_block(box.lower, i, partition))
      .cwiseMin(extract_block(box.upper, i, partition));
}

bool within_box(const Point& x, const BoxBounds& box) {
  return x.size() == box.lower.size() && (x.array() >= box.lower.array()).all() &&
         (x.array() <= box.upper.array()).all();
}

}  // namespace cpgd
