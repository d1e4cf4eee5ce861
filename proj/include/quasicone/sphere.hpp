#pragma once

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "quasicone/error.hpp"

namespace quasicone {

/// Spherical Fibonacci lattice on the open upper hemisphere z > 0, so each
/// antipodal pair of directions is represented once.
struct SphereGrid {
  std::vector<Eigen::Vector3d> points;
  /// Typical nearest-neighbour angle.
  double spacing = 0.0;
};

inline SphereGrid make_hemisphere_grid(int count) {
  if (count < 1) throw Error(ErrorCode::kInvalidArgument, "sphere grid needs at least one point");
  SphereGrid g;
  g.points.reserve(count);
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < count; ++i) {
    const double z = 1.0 - (i + 0.5) / count;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden * i;
    g.points.emplace_back(r * std::cos(phi), r * std::sin(phi), z);
  }
  g.spacing = std::sqrt(2.0 * std::numbers::pi / count);
  return g;
}

/// Cached grid of resolution^2 points.
inline const SphereGrid& sphere_grid(int resolution) {
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<SphereGrid>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[resolution];
  if (!slot) slot = std::make_unique<SphereGrid>(make_hemisphere_grid(resolution * resolution));
  return *slot;
}

/// Angle between two lines through the origin.
inline double line_angle(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  const double c = std::abs(a.normalized().dot(b.normalized()));
  return std::acos(std::min(1.0, c));
}

/// Flips v so its first coordinate with |v_i| > 1e-12 is positive.
inline Eigen::Vector3d canonical_sign(Eigen::Vector3d v) {
  for (int i = 0; i < 3; ++i) {
    if (std::abs(v[i]) > 1e-12) {
      if (v[i] < 0) v = -v;
      break;
    }
  }
  return v;
}

}  // namespace quasicone
