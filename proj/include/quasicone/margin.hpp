#pragma once

// Rank-one positivity margin: min over unit x, y of Q(x (x) y), i.e. the
// minimum over the sphere of lambda_min(T(y)).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "quasicone/error.hpp"
#include "quasicone/forms.hpp"
#include "quasicone/parallel.hpp"
#include "quasicone/sphere.hpp"
#include "quasicone/sym3.hpp"

namespace quasicone {

struct CertifyConfig {
  int grid_resolution = 96;  ///< lattice has grid_resolution^2 points
  int refine_iters = 40;
  double tol = 1e-9;
  std::uint64_t seed = 42;
  int probe_directions = 256;
  int bisection_iters = 60;

  void validate() const {
    if (grid_resolution < 8) throw Error(ErrorCode::kInvalidArgument, "grid_resolution must be >= 8");
    if (!(tol > 0)) throw Error(ErrorCode::kInvalidArgument, "tol must be > 0");
    if (refine_iters < 0 || probe_directions < 1 || bisection_iters < 1) {
      throw Error(ErrorCode::kInvalidArgument, "iteration counts must be positive");
    }
  }
};

inline void to_json(nlohmann::json& j, const CertifyConfig& c) {
  j = {{"grid_resolution", c.grid_resolution}, {"refine_iters", c.refine_iters},
       {"tol", c.tol},                         {"seed", c.seed},
       {"probe_directions", c.probe_directions}, {"bisection_iters", c.bisection_iters}};
}

inline void from_json(const nlohmann::json& j, CertifyConfig& c) {
  c.grid_resolution = j.value("grid_resolution", c.grid_resolution);
  c.refine_iters = j.value("refine_iters", c.refine_iters);
  c.tol = j.value("tol", c.tol);
  c.seed = j.value("seed", c.seed);
  c.probe_directions = j.value("probe_directions", c.probe_directions);
  c.bisection_iters = j.value("bisection_iters", c.bisection_iters);
}

struct RankOnePair {
  Vec3 x;
  Vec3 y;
  double value;
};

struct MarginReport {
  double margin = 0.0;
  std::vector<RankOnePair> minimizers;
};

inline void to_json(nlohmann::json& j, const RankOnePair& p) {
  j = {{"x", {p.x[0], p.x[1], p.x[2]}}, {"y", {p.y[0], p.y[1], p.y[2]}}, {"value", p.value}};
}

/// Largest Gram entry magnitude; the unit for all relative thresholds here.
inline double form_scale(const QuadraticForm& q) {
  const double s = q.gram().cwiseAbs().maxCoeff();
  return s > 0 ? s : 1.0;
}

namespace detail {

using Real = long double;
using RVec3 = Eigen::Matrix<Real, 3, 1>;
using RMat3 = Eigen::Matrix<Real, 3, 3>;
using RGram = Eigen::Matrix<Real, 9, 9>;

// Local descent on S^2 x S^2 in extended precision: damped Riemannian Newton,
// with an exact alternating step (x <- argmin T(y), y <- argmin S(x)) as the
// fallback whenever Newton fails to decrease.
class PairRefiner {
 public:
  explicit PairRefiner(const QuadraticForm& q) : g_(q.gram().cast<Real>()), scale_(form_scale(q)) {}

  Real value(const RVec3& x, const RVec3& y) const {
    const auto v = vec(x, y);
    return v.dot(g_ * v);
  }

  RankOnePair refine(const Vec3& y_start, int iters) const {
    RVec3 y = y_start.cast<Real>().normalized();
    RVec3 x = min_vector(t_matrix(y));
    Real f = value(x, y);
    for (int it = 0; it < iters; ++it) {
      if (!newton_step(x, y, f) && !alternating_step(x, y, f)) break;
    }
    return {x.cast<double>(), y.cast<double>(), static_cast<double>(f)};
  }

 private:
  using Vec9R = Eigen::Matrix<Real, 9, 1>;

  static Vec9R vec(const RVec3& x, const RVec3& y) {
    Vec9R v;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) v[3 * i + j] = x[i] * y[j];
    return v;
  }

  RMat3 t_matrix(const RVec3& y) const {
    RMat3 t = RMat3::Zero();
    for (int i = 0; i < 3; ++i)
      for (int k = 0; k < 3; ++k)
        for (int j = 0; j < 3; ++j)
          for (int l = 0; l < 3; ++l) t(i, k) += g_(3 * i + j, 3 * k + l) * y[j] * y[l];
    return t;
  }

  RMat3 s_matrix(const RVec3& x) const {
    RMat3 s = RMat3::Zero();
    for (int j = 0; j < 3; ++j)
      for (int l = 0; l < 3; ++l)
        for (int i = 0; i < 3; ++i)
          for (int k = 0; k < 3; ++k) s(j, l) += g_(3 * i + j, 3 * k + l) * x[i] * x[k];
    return s;
  }

  static RVec3 min_vector(const RMat3& m) {
    Eigen::SelfAdjointEigenSolver<RMat3> es(m);
    return es.eigenvectors().col(0).normalized();
  }

  // Orthonormal basis of the plane orthogonal to unit v.
  static Eigen::Matrix<Real, 3, 2> tangent_basis(const RVec3& v) {
    RVec3 a = std::abs(v[0]) < 0.6L ? RVec3(1, 0, 0) : (std::abs(v[1]) < 0.6L ? RVec3(0, 1, 0) : RVec3(0, 0, 1));
    RVec3 u1 = (a - a.dot(v) * v).normalized();
    RVec3 u2 = v.cross(u1).normalized();
    Eigen::Matrix<Real, 3, 2> b;
    b << u1, u2;
    return b;
  }

  bool newton_step(RVec3& x, RVec3& y, Real& f) const {
    const RMat3 t = t_matrix(y);
    const RMat3 s = s_matrix(x);
    const Vec9R gv = g_ * vec(x, y);
    RMat3 mixed;  // d^2 f / dx_a dy_b
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        Real acc = gv[3 * a + b];
        for (int j = 0; j < 3; ++j)
          for (int k = 0; k < 3; ++k) acc += g_(3 * a + j, 3 * k + b) * y[j] * x[k];
        mixed(a, b) = 2 * acc;
      }
    }
    const auto ux = tangent_basis(x);
    const auto uy = tangent_basis(y);
    Eigen::Matrix<Real, 4, 1> grad;
    grad << ux.transpose() * (2 * t * x), uy.transpose() * (2 * s * y);
    Eigen::Matrix<Real, 4, 4> h;
    h.template topLeftCorner<2, 2>() = ux.transpose() * (2 * t) * ux - 2 * f * Eigen::Matrix<Real, 2, 2>::Identity();
    h.template bottomRightCorner<2, 2>() = uy.transpose() * (2 * s) * uy - 2 * f * Eigen::Matrix<Real, 2, 2>::Identity();
    h.template topRightCorner<2, 2>() = ux.transpose() * mixed * uy;
    h.template bottomLeftCorner<2, 2>() = h.template topRightCorner<2, 2>().transpose();

    Eigen::SelfAdjointEigenSolver<Eigen::Matrix<Real, 4, 4>> es(h);
    const Real floor = 1e-14L * scale_;
    const Real lmin = es.eigenvalues()[0];
    const Real shift = lmin > floor ? Real(0) : floor - lmin;
    Eigen::Matrix<Real, 4, 1> inv = (es.eigenvalues().array() + shift).inverse();
    const Eigen::Matrix<Real, 4, 1> step = -(es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose() * grad);

    Real alpha = 1;
    for (int tries = 0; tries < 30; ++tries, alpha *= 0.5L) {
      RVec3 xn = (x + alpha * (ux * step.template head<2>())).normalized();
      RVec3 yn = (y + alpha * (uy * step.template tail<2>())).normalized();
      const Real fn = value(xn, yn);
      if (fn < f) {
        x = xn;
        y = yn;
        f = fn;
        return true;
      }
    }
    return false;
  }

  bool alternating_step(RVec3& x, RVec3& y, Real& f) const {
    RVec3 xn = min_vector(t_matrix(y));
    RVec3 yn = min_vector(s_matrix(xn));
    const Real fn = value(xn, yn);
    if (fn < f) {
      x = xn;
      y = yn;
      f = fn;
      return true;
    }
    return false;
  }

  RGram g_;
  Real scale_;
};

inline std::vector<double> grid_values(const QuadraticForm& q, const SphereGrid& grid) {
  const AcousticCoefficients ac = acoustic_coefficients(q);
  std::vector<double> vals(grid.points.size());
  constexpr std::size_t kChunk = 512;
  const std::size_t chunks = (vals.size() + kChunk - 1) / kChunk;
  parallel_for(chunks, [&](std::size_t c) {
    const std::size_t end = std::min(vals.size(), (c + 1) * kChunk);
    for (std::size_t i = c * kChunk; i < end; ++i) vals[i] = min_eigenvalue(ac.evaluate(grid.points[i]));
  });
  return vals;
}

/// Lowest grid points, greedily thinned so chosen directions are at least
/// `separation` apart; ties broken by lattice index.
inline std::vector<std::size_t> pick_candidates(const std::vector<double>& vals, const SphereGrid& grid,
                                                std::size_t count, double separation) {
  std::vector<std::size_t> order(vals.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
  std::vector<std::size_t> picked;
  for (std::size_t idx : order) {
    if (picked.size() >= count) break;
    bool far = true;
    for (std::size_t p : picked) {
      if (line_angle(grid.points[idx], grid.points[p]) < separation) {
        far = false;
        break;
      }
    }
    if (far) picked.push_back(idx);
  }
  return picked;
}

inline RankOnePair canonical_pair(RankOnePair p) {
  p.x = canonical_sign(p.x.normalized());
  p.y = canonical_sign(p.y.normalized());
  return p;
}

/// Merges pairs whose x and y lines both lie within `angle`; keeps the lower
/// value, then orders by value.
inline std::vector<RankOnePair> cluster_pairs(const std::vector<RankOnePair>& pairs, double angle) {
  std::vector<RankOnePair> reps;
  for (const auto& raw : pairs) {
    const RankOnePair p = canonical_pair(raw);
    bool merged = false;
    for (auto& r : reps) {
      if (line_angle(r.x, p.x) < angle && line_angle(r.y, p.y) < angle) {
        if (p.value < r.value) r = p;
        merged = true;
        break;
      }
    }
    if (!merged) reps.push_back(p);
  }
  std::stable_sort(reps.begin(), reps.end(), [](const auto& a, const auto& b) { return a.value < b.value; });
  return reps;
}

}  // namespace detail

enum class RefineMode {
  kAllGridPoints,  ///< every lattice point is refined
  kCandidates,     ///< only the lowest well-separated lattice points
};

inline constexpr std::size_t kProbeCandidates = 16;
inline constexpr double kMinimizerClusterAngle = 1e-3;

struct MarginScan {
  double margin;
  std::vector<RankOnePair> refined;  ///< one per refined start, lattice order
};

inline MarginScan margin_scan(const QuadraticForm& q, const CertifyConfig& cfg, RefineMode mode) {
  cfg.validate();
  const SphereGrid& grid = sphere_grid(cfg.grid_resolution);
  const std::vector<double> vals = detail::grid_values(q, grid);
  std::vector<std::size_t> starts;
  if (mode == RefineMode::kAllGridPoints) {
    starts.resize(vals.size());
    std::iota(starts.begin(), starts.end(), 0);
  } else {
    starts = detail::pick_candidates(vals, grid, kProbeCandidates, 3.0 * grid.spacing);
  }
  const detail::PairRefiner refiner(q);
  MarginScan scan;
  scan.refined.resize(starts.size());
  parallel_for(starts.size(), [&](std::size_t k) { scan.refined[k] = refiner.refine(grid.points[starts[k]], cfg.refine_iters); });
  scan.margin = *std::min_element(vals.begin(), vals.end());
  for (const auto& r : scan.refined) scan.margin = std::min(scan.margin, r.value);
  return scan;
}

/// Min over the unit sphere of lambda_min(T(y)); every lattice point is
/// refined.
inline MarginReport quasiconvexity_margin(const QuadraticForm& q, const CertifyConfig& cfg) {
  const MarginScan scan = margin_scan(q, cfg, RefineMode::kAllGridPoints);
  MarginReport rep;
  rep.margin = scan.margin;
  std::vector<RankOnePair> near;
  for (const auto& r : scan.refined)
    if (r.value <= scan.margin + cfg.tol) near.push_back(r);
  rep.minimizers = detail::cluster_pairs(near, kMinimizerClusterAngle);
  return rep;
}

/// Margin from the lowest separated lattice points only; used inside probes.
inline double fast_margin(const QuadraticForm& q, const CertifyConfig& cfg) {
  return margin_scan(q, cfg, RefineMode::kCandidates).margin;
}

/// Clustered unit pairs with Q(x (x) y) <= tol.
inline std::vector<RankOnePair> rank_one_zeros(const QuadraticForm& q, const CertifyConfig& cfg) {
  const MarginScan scan = margin_scan(q, cfg, RefineMode::kAllGridPoints);
  if (scan.margin < -cfg.tol * form_scale(q)) {
    throw Error(ErrorCode::kPrecondition,
                "rank_one_zeros requires a quasiconvex form (margin " + std::to_string(scan.margin) + ")");
  }
  std::vector<RankOnePair> zeros;
  for (const auto& r : scan.refined)
    if (r.value <= cfg.tol) zeros.push_back(r);
  return detail::cluster_pairs(zeros, kMinimizerClusterAngle);
}

inline void to_json(nlohmann::json& j, const MarginReport& r) {
  j = {{"margin", r.margin}, {"minimizer_count", r.minimizers.size()}};
  nlohmann::json mins = nlohmann::json::array();
  for (std::size_t k = 0; k < r.minimizers.size() && k < 64; ++k) mins.push_back(r.minimizers[k]);
  j["minimizers"] = std::move(mins);
}

}  // namespace quasicone
