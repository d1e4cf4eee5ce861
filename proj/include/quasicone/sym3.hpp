#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>

namespace quasicone {

struct MinEigenpair {
  double value;
  Eigen::Vector3d vector;
};

inline MinEigenpair min_eigenpair(const Eigen::Matrix3d& t) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(t);
  return {es.eigenvalues()[0], es.eigenvectors().col(0)};
}

/// Smallest eigenvalue of a symmetric 3x3 matrix. Trigonometric solve of the
/// characteristic cubic; near a repeated root (1 - r^2 < 1e-12) acos loses
/// half the digits, so those cases go to the iterative solver instead.
inline double min_eigenvalue(const Eigen::Matrix3d& t) {
  const double off = t(0, 1) * t(0, 1) + t(0, 2) * t(0, 2) + t(1, 2) * t(1, 2);
  const double q = t.trace() / 3.0;
  const double d0 = t(0, 0) - q, d1 = t(1, 1) - q, d2 = t(2, 2) - q;
  const double p2 = d0 * d0 + d1 * d1 + d2 * d2 + 2.0 * off;
  const double scale = std::max({std::abs(t(0, 0)), std::abs(t(1, 1)), std::abs(t(2, 2)), std::sqrt(off)});
  if (p2 <= 1e-30 * scale * scale) return q;
  const double p = std::sqrt(p2 / 6.0);
  Eigen::Matrix3d b = (t - q * Eigen::Matrix3d::Identity()) / p;
  const double r = 0.5 * b.determinant();
  if (1.0 - r * r < 1e-12) return min_eigenpair(t).value;
  const double phi = std::acos(std::clamp(r, -1.0, 1.0)) / 3.0;
  return q + 2.0 * p * std::cos(phi + 2.0 * std::numbers::pi / 3.0);
}

}  // namespace quasicone
