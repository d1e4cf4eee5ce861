#pragma once

// Extremality probes and the polyconvexity test. Each probe is a numerical
// screen: "refuted" always carries a witness that can be re-checked,
// "consistent" only means the search found nothing.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "quasicone/determinant.hpp"
#include "quasicone/error.hpp"
#include "quasicone/forms.hpp"
#include "quasicone/margin.hpp"
#include "quasicone/minors.hpp"
#include "quasicone/parallel.hpp"
#include "quasicone/polynomial.hpp"
#include "quasicone/sphere.hpp"
#include "quasicone/sym3.hpp"

namespace quasicone {

enum class Verdict { kConsistent, kRefuted, kInconclusive, kPolyconvex, kNotPolyconvex };

inline std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::kConsistent: return "consistent";
    case Verdict::kRefuted: return "refuted";
    case Verdict::kInconclusive: return "inconclusive";
    case Verdict::kPolyconvex: return "polyconvex";
    case Verdict::kNotPolyconvex: return "not_polyconvex";
  }
  return "inconclusive";
}

struct ProbeReport {
  std::string kind;
  double value = 0.0;
  nlohmann::json witness = nlohmann::json::object();
  Verdict verdict = Verdict::kInconclusive;
};

inline void to_json(nlohmann::json& j, const ProbeReport& r) {
  j = {{"kind", r.kind}, {"value", r.value}, {"verdict", to_string(r.verdict)}, {"witness", r.witness}};
}

/// Margins above -kFeasibilityFloor * scale count as quasiconvex inside the
/// bisections; this is the round-off level of the extended precision refiner,
/// not the user tolerance.
inline constexpr double kFeasibilityFloor = 1e-15;

inline nlohmann::json matrix_json(const Mat3& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (int i = 0; i < 3; ++i) rows.push_back({m(i, 0), m(i, 1), m(i, 2)});
  return rows;
}

namespace detail {

inline void require_quasiconvex(const QuadraticForm& q, const CertifyConfig& cfg, const char* who) {
  const double m = fast_margin(q, cfg);
  if (m < -cfg.tol * form_scale(q)) {
    throw Error(ErrorCode::kPrecondition,
                std::string(who) + " requires a quasiconvex form; margin is " + std::to_string(m));
  }
}

inline Mat3 acoustic_of(const AcousticCoefficients& ac, const Vec3& y) { return ac.evaluate(y); }

// Quasiconvexity of the one-parameter family T0(y) + s T1(y) with the
// per-point matrices cached. Grid rejection is exact (any grid value below
// the floor is a real violation); grid acceptance is confirmed by refining
// the lowest separated lattice points on the actual form.
class FamilyScanner {
 public:
  FamilyScanner(std::vector<Mat3> t0, std::vector<Mat3> t1, Gram g0, Gram g1, const CertifyConfig& cfg,
                double scale)
      : t0_(std::move(t0)), t1_(std::move(t1)), g0_(std::move(g0)), g1_(std::move(g1)), cfg_(cfg),
        floor_(-kFeasibilityFloor * scale), values_(t0_.size()) {}

  bool feasible(double s) {
    const SphereGrid& grid = sphere_grid(cfg_.grid_resolution);
    for (std::size_t i = 0; i < t0_.size(); ++i) {
      values_[i] = min_eigenvalue(t0_[i] + s * t1_[i]);
      if (values_[i] < floor_) return false;
    }
    const auto starts = pick_candidates(values_, grid, kProbeCandidates, 3.0 * grid.spacing);
    const PairRefiner refiner(QuadraticForm(g0_ + s * g1_));
    for (std::size_t k : starts) {
      if (refiner.refine(grid.points[k], cfg_.refine_iters).value < floor_) return false;
    }
    return true;
  }

 private:
  std::vector<Mat3> t0_, t1_;
  Gram g0_, g1_;
  const CertifyConfig& cfg_;
  double floor_;
  std::vector<double> values_;
};

inline std::vector<Mat3> acoustic_on_grid(const QuadraticForm& q, const SphereGrid& grid) {
  const AcousticCoefficients ac = acoustic_coefficients(q);
  std::vector<Mat3> out(grid.points.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = ac.evaluate(grid.points[i]);
  return out;
}

inline Mat3 unvectorize(const Vec9& v) {
  Mat3 m;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m(i, j) = v[entry_index(i, j)];
  return m;
}

inline Vec9 random_unit9(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  Vec9 v;
  for (int k = 0; k < 9; ++k) v[k] = n(rng);
  return v.normalized();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Milton extremality

/// sup{eps : Q - eps * l^2 quasiconvex} for the linear form l(xi) = m . vec(xi),
/// |m| = 1, by bisection.
inline double milton_epsilon(const QuadraticForm& q, const Vec9& m_raw, const CertifyConfig& cfg,
                             const std::vector<Mat3>* t0_cache = nullptr) {
  const Vec9 m = m_raw.normalized();
  const SphereGrid& grid = sphere_grid(cfg.grid_resolution);
  const Mat3 mm = detail::unvectorize(m);
  std::vector<Mat3> t0 = t0_cache ? *t0_cache : detail::acoustic_on_grid(q, grid);
  std::vector<Mat3> t1(grid.points.size());
  // Q(x (x) y) - eps (x.My)^2 < 0 at x = My once eps > (My).T(My) / |My|^4.
  double hi = 1e6 * form_scale(q);
  for (std::size_t i = 0; i < t1.size(); ++i) {
    const Vec3 my = mm * grid.points[i];
    t1[i] = -my * my.transpose();
    const double n2 = my.squaredNorm();
    if (n2 > 1e-12) hi = std::min(hi, my.dot(t0[i] * my) / (n2 * n2));
  }
  hi = std::max(hi, 0.0) * (1.0 + 1e-9) + 1e-300;
  detail::FamilyScanner scan(std::move(t0), std::move(t1), q.gram(), -(m * m.transpose()), cfg, form_scale(q));
  if (!scan.feasible(0.0)) return 0.0;
  double lo = 0.0;
  for (int it = 0; it < cfg.bisection_iters; ++it) {
    const double mid = 0.5 * (lo + hi);
    (scan.feasible(mid) ? lo : hi) = mid;
  }
  return lo;
}

/// Milton's test: Q should lose quasiconvexity when any rank-one square is
/// subtracted.
inline ProbeReport milton_extremality_probe(const QuadraticForm& q, const CertifyConfig& cfg) {
  cfg.validate();
  detail::require_quasiconvex(q, cfg, "milton_extremality_probe");
  const int count = cfg.probe_directions;
  const int aligned = count / 2;
  std::vector<Vec9> dirs(count);
  Eigen::SelfAdjointEigenSolver<Gram> es(q.gram());
  std::mt19937_64 rng(mix_seed(cfg.seed ^ 0x4d494c54ULL));
  for (int k = 0; k < count; ++k) {
    if (k < aligned) {
      // Eigenvectors first (smallest eigenvalue first), then jittered copies.
      const Vec9 e = es.eigenvectors().col(k % 9);
      dirs[k] = k < 9 ? e : (e + 0.25 * detail::random_unit9(rng)).normalized();
    } else {
      dirs[k] = detail::random_unit9(rng);
    }
  }
  const std::vector<Mat3> t0 = detail::acoustic_on_grid(q, sphere_grid(cfg.grid_resolution));
  std::vector<double> eps(count);
  parallel_for(count, [&](std::size_t k) { eps[k] = milton_epsilon(q, dirs[k], cfg, &t0); });
  const auto best = std::max_element(eps.begin(), eps.end()) - eps.begin();

  ProbeReport rep;
  rep.kind = "milton";
  rep.value = eps[best];
  const Vec9& m = dirs[best];
  rep.witness = {{"direction", std::vector<double>(m.data(), m.data() + 9)},
                 {"epsilon", eps[best]},
                 {"directions_tested", count}};
  const double consistent_limit = std::max(10.0 * cfg.tol, 1e-6) * form_scale(q);
  if (rep.value <= consistent_limit) {
    rep.verdict = Verdict::kConsistent;
  } else if (rep.value > 1e-4 * form_scale(q)) {
    rep.verdict = Verdict::kRefuted;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Extreme points of the orthotropic cone

enum class ShearLayout { kPaired, kSingle };

inline std::string to_string(ShearLayout l) { return l == ShearLayout::kPaired ? "paired" : "single_shear"; }

/// Gram basis of the 9-parameter family, parameter order
/// (a11, a22, a33, a12, a13, a23, b, c, d).
inline std::array<Gram, 9> orthotropic_basis(ShearLayout layout) {
  std::array<Gram, 9> basis;
  for (int k = 0; k < 9; ++k) {
    Eigen::Matrix<double, 9, 1> p = Eigen::Matrix<double, 9, 1>::Zero();
    p[k] = 1.0;
    const auto r = ReducedOrthotropicForm::from_parameters(p);
    basis[k] = layout == ShearLayout::kPaired ? form_from_reduced(r).gram()
                                              : form_from_single_shear(r.a, r.b, r.c, r.d).gram();
  }
  return basis;
}

inline Gram gram_from_parameters(const std::array<Gram, 9>& basis, const Eigen::Matrix<double, 9, 1>& p) {
  Gram g = Gram::Zero();
  for (int k = 0; k < 9; ++k) g += p[k] * basis[k];
  return g;
}

struct OrthotropicFit {
  ShearLayout layout;
  Eigen::Matrix<double, 9, 1> parameters;
};

/// Recognizes q as a paired or single-shear orthotropic form (exact Gram
/// match up to 1e-12 relative).
inline std::optional<OrthotropicFit> fit_orthotropic(const QuadraticForm& q) {
  const double scale = form_scale(q);
  for (ShearLayout layout : {ShearLayout::kPaired, ShearLayout::kSingle}) {
    const auto basis = orthotropic_basis(layout);
    Eigen::Matrix<double, 81, 9> a;
    for (int k = 0; k < 9; ++k) a.col(k) = basis[k].reshaped();
    const Eigen::Matrix<double, 81, 1> b = q.gram().reshaped();
    const Eigen::Matrix<double, 9, 1> p = a.colPivHouseholderQr().solve(b);
    if ((a * p - b).cwiseAbs().maxCoeff() <= 1e-12 * scale) return OrthotropicFit{layout, p};
  }
  return std::nullopt;
}

/// Frobenius distance of g1 from the line through g.
inline double distance_from_line(const Gram& g1, const Gram& g) {
  const double n2 = g.squaredNorm();
  if (n2 == 0.0) return g1.norm();
  return (g1 - (g1.cwiseProduct(g).sum() / n2) * g).norm();
}

namespace detail {

using Param9 = Eigen::Matrix<double, 9, 1>;

// Largest t with both p/2 + t u and p/2 - t u in the quasiconvex cone.
class SplitSearch {
 public:
  SplitSearch(const OrthotropicFit& fit, const CertifyConfig& cfg, double scale)
      : fit_(fit), basis_(orthotropic_basis(fit.layout)), cfg_(cfg), scale_(scale) {
    const SphereGrid& grid = sphere_grid(cfg.grid_resolution);
    half_ = QuadraticForm(0.5 * gram_from_parameters(basis_, fit.parameters));
    half_t_ = acoustic_on_grid(half_, grid);
  }

  double max_split(const Param9& u) const {
    const SphereGrid& grid = sphere_grid(cfg_.grid_resolution);
    const QuadraticForm uq(gram_from_parameters(basis_, u));
    std::vector<Mat3> tu = acoustic_on_grid(uq, grid);
    std::vector<Mat3> tneg(tu.size());
    for (std::size_t i = 0; i < tu.size(); ++i) tneg[i] = -tu[i];
    FamilyScanner plus(half_t_, std::move(tu), half_.gram(), uq.gram(), cfg_, scale_);
    FamilyScanner minus(half_t_, std::move(tneg), half_.gram(), -uq.gram(), cfg_, scale_);
    const auto ok = [&](double t) { return plus.feasible(t) && minus.feasible(t); };

    const double pnorm = fit_.parameters.norm();
    double lo = 0.0, hi = pnorm;
    int it = 0;
    // Bracket upward while feasible, then bisect. A relative width of 1e-4
    // is far finer than the 1e-5 * norm decision needs.
    while (it < cfg_.bisection_iters && ok(hi)) {
      lo = hi;
      hi *= 2.0;
      ++it;
      if (hi > 1024.0 * pnorm) return lo;
    }
    for (; it < cfg_.bisection_iters && hi - lo > 1e-4 * hi && hi > 1e-9 * pnorm; ++it) {
      const double mid = 0.5 * (lo + hi);
      (ok(mid) ? lo : hi) = mid;
    }
    return lo;
  }

  const std::array<Gram, 9>& basis() const { return basis_; }

 private:
  OrthotropicFit fit_;
  std::array<Gram, 9> basis_;
  const CertifyConfig& cfg_;
  double scale_;
  QuadraticForm half_;
  std::vector<Mat3> half_t_;
};

inline Param9 orthogonal_unit(const Param9& v, const Param9& p) {
  const Param9 r = v - (v.dot(p) / p.squaredNorm()) * p;
  return r.normalized();
}

}  // namespace detail

/// Searches for Q = Q1 + Q2 with both parts quasiconvex in q's own orthotropic
/// layout and Q1 off the ray through Q.
inline ProbeReport extreme_point_probe(const QuadraticForm& q, const CertifyConfig& cfg) {
  cfg.validate();
  const auto fit = fit_orthotropic(q);
  if (!fit) {
    throw Error(ErrorCode::kPrecondition,
                "extreme_point_probe requires an orthotropic form (paired or single-shear layout)");
  }
  if (auto bad = strict_positivity_violation(ReducedOrthotropicForm::from_parameters(fit->parameters))) {
    throw Error(ErrorCode::kPrecondition, "Eq (3.2) strict positivity violated: " + *bad);
  }
  detail::require_quasiconvex(q, cfg, "extreme_point_probe");
  const double scale = form_scale(q);
  const detail::SplitSearch search(*fit, cfg, scale);
  const detail::Param9& p = fit->parameters;

  std::mt19937_64 rng(mix_seed(cfg.seed ^ 0x45585452ULL));
  std::vector<detail::Param9> dirs(cfg.probe_directions);
  for (auto& u : dirs) u = detail::orthogonal_unit(detail::random_unit9(rng), p);
  std::vector<double> ts(dirs.size());
  parallel_for(dirs.size(), [&](std::size_t k) { ts[k] = search.max_split(dirs[k]); });

  // Local ascent from the best few starts: jitter the direction, keep gains.
  std::vector<std::size_t> order(dirs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return ts[a] > ts[b]; });
  const std::size_t polish = std::min<std::size_t>(4, order.size());
  std::vector<std::uint64_t> seeds(polish);
  for (std::size_t r = 0; r < polish; ++r) seeds[r] = rng();
  parallel_for(polish, [&](std::size_t r) {
    const std::size_t k = order[r];
    std::mt19937_64 local(seeds[r]);
    double sigma = 0.3;
    for (int step = 0; step < 24 && sigma > 1e-3; ++step) {
      const detail::Param9 cand = detail::orthogonal_unit(dirs[k] + sigma * detail::random_unit9(local), p);
      const double t = search.max_split(cand);
      if (t > ts[k]) {
        ts[k] = t;
        dirs[k] = cand;
      } else {
        sigma *= 0.6;
      }
    }
  });

  const std::size_t best = std::max_element(ts.begin(), ts.end()) - ts.begin();
  const auto& basis = search.basis();
  double t = ts[best];
  detail::Param9 p1 = 0.5 * p + t * dirs[best];
  // The bisection accepts on candidate refinement only; confirm the split
  // with the full margin and back off until both parts pass.
  for (int k = 0; k < 40 && t > 0; ++k) {
    p1 = 0.5 * p + t * dirs[best];
    const QuadraticForm q1(gram_from_parameters(basis, p1));
    const QuadraticForm q2(gram_from_parameters(basis, p - p1));
    if (quasiconvexity_margin(q1, cfg).margin >= -cfg.tol && quasiconvexity_margin(q2, cfg).margin >= -cfg.tol) break;
    t *= 0.5;
  }
  p1 = 0.5 * p + t * dirs[best];
  const Gram g1 = gram_from_parameters(basis, p1);

  ProbeReport rep;
  rep.kind = "extreme_point";
  rep.value = distance_from_line(g1, q.gram());
  rep.witness = {{"layout", to_string(fit->layout)},
                 {"parameters", std::vector<double>(p.data(), p.data() + 9)},
                 {"q1_parameters", std::vector<double>(p1.data(), p1.data() + 9)},
                 {"split_t", t},
                 {"starts", cfg.probe_directions}};
  rep.verdict = rep.value <= 1e-5 * q.norm() ? Verdict::kConsistent : Verdict::kRefuted;
  return rep;
}

// ---------------------------------------------------------------------------
// Extremal sextics

struct PolyJet {
  double value = 0.0;
  Vec3 grad = Vec3::Zero();
  Mat3 hess = Mat3::Zero();
};

inline double ipow(double x, int e) {
  double r = 1.0;
  for (int i = 0; i < e; ++i) r *= x;
  return r;
}

/// Value, gradient and Hessian of the monomial y^e.
inline PolyJet monomial_jet(const Exponent& e, const Vec3& y) {
  PolyJet j;
  const auto pw = [&](int axis, int drop) {
    return e[axis] >= drop ? ipow(y[axis], e[axis] - drop) : 0.0;
  };
  const auto fall = [&](int axis, int drop) {
    double c = 1.0;
    for (int k = 0; k < drop; ++k) c *= e[axis] - k;
    return c;
  };
  j.value = pw(0, 0) * pw(1, 0) * pw(2, 0);
  for (int a = 0; a < 3; ++a) {
    std::array<int, 3> d{0, 0, 0};
    d[a] = 1;
    j.grad[a] = fall(a, 1) * pw(0, d[0]) * pw(1, d[1]) * pw(2, d[2]);
    for (int b = 0; b < 3; ++b) {
      std::array<int, 3> dd{0, 0, 0};
      ++dd[a];
      ++dd[b];
      j.hess(a, b) = fall(0, dd[0]) * fall(1, dd[1]) * fall(2, dd[2]) * pw(0, dd[0]) * pw(1, dd[1]) * pw(2, dd[2]);
    }
  }
  return j;
}

inline PolyJet poly_jet(const HomogeneousPolynomial& p, const Vec3& y) {
  PolyJet j;
  for (const auto& [e, c] : p.terms()) {
    const PolyJet m = monomial_jet(e, y);
    j.value += c * m.value;
    j.grad += c * m.grad;
    j.hess += c * m.hess;
  }
  return j;
}

namespace detail {

inline Eigen::Matrix<double, 3, 2> sphere_tangent(const Vec3& v) {
  Vec3 a = std::abs(v[0]) < 0.6 ? Vec3(1, 0, 0) : (std::abs(v[1]) < 0.6 ? Vec3(0, 1, 0) : Vec3(0, 0, 1));
  const Vec3 u1 = (a - a.dot(v) * v).normalized();
  Eigen::Matrix<double, 3, 2> b;
  b << u1, v.cross(u1).normalized();
  return b;
}

/// Tangent Hessian of a homogeneous p at a unit point (Riemannian, on S^2).
inline Eigen::Matrix2d tangent_hessian(const PolyJet& j, const Eigen::Matrix<double, 3, 2>& u, int degree) {
  return u.transpose() * j.hess * u - degree * j.value * Eigen::Matrix2d::Identity();
}

// Damped Newton descent of p on the sphere.
inline Vec3 descend_polynomial(const HomogeneousPolynomial& p, Vec3 y, int iters, double scale) {
  y.normalize();
  PolyJet j = poly_jet(p, y);
  for (int it = 0; it < iters; ++it) {
    const auto u = sphere_tangent(y);
    const Eigen::Vector2d g = u.transpose() * j.grad;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(tangent_hessian(j, u, p.degree()));
    const double floor = 1e-14 * scale;
    const double shift = es.eigenvalues()[0] > floor ? 0.0 : floor - es.eigenvalues()[0];
    const Eigen::Vector2d inv = (es.eigenvalues().array() + shift).inverse();
    const Eigen::Vector2d step = -(es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose() * g);
    double alpha = 1.0;
    bool moved = false;
    for (int k = 0; k < 40; ++k, alpha *= 0.5) {
      const Vec3 yn = (y + alpha * (u * step)).normalized();
      const PolyJet jn = poly_jet(p, yn);
      if (jn.value < j.value) {
        y = yn;
        j = jn;
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  return y;
}

}  // namespace detail

struct SexticZeros {
  std::vector<Vec3> zeros;
  double min_value = 0.0;  ///< minimum of p seen on the sphere
};

/// Zero set of a nonnegative form on the sphere, one point per antipodal line.
inline SexticZeros polynomial_zeros(const HomogeneousPolynomial& p, const CertifyConfig& cfg) {
  const SphereGrid& grid = sphere_grid(cfg.grid_resolution);
  const double scale = std::max(p.max_abs_coefficient(), 1e-300);
  std::vector<double> vals(grid.points.size());
  for (std::size_t i = 0; i < vals.size(); ++i) vals[i] = poly_eval(p, grid.points[i]);
  const auto starts = detail::pick_candidates(vals, grid, 4 * kProbeCandidates, 2.0 * grid.spacing);
  std::vector<Vec3> refined(starts.size());
  parallel_for(starts.size(), [&](std::size_t k) {
    refined[k] = detail::descend_polynomial(p, grid.points[starts[k]], 10 * cfg.refine_iters, scale);
  });
  SexticZeros out;
  out.min_value = *std::min_element(vals.begin(), vals.end());
  for (const Vec3& z : refined) {
    const double v = poly_eval(p, z);
    out.min_value = std::min(out.min_value, v);
    if (std::abs(v) > cfg.tol * scale) continue;
    const Vec3 c = canonical_sign(z);
    bool dup = false;
    for (const Vec3& w : out.zeros) dup = dup || line_angle(w, c) < kMinimizerClusterAngle;
    if (!dup) out.zeros.push_back(c);
  }
  return out;
}

inline constexpr double kRankCutoff = 1e-7;

/// Necessary-condition screen for extremality of a nonnegative sextic: any
/// 0 <= R <= p vanishes with its gradient on the zeros of p, and annihilates
/// the flat Hessian directions of p there. value = dimension of the space of
/// sextics satisfying all of that.
inline ProbeReport extremal_polynomial_probe(const HomogeneousPolynomial& p, const CertifyConfig& cfg) {
  cfg.validate();
  if (p.degree() != 6) throw Error(ErrorCode::kDegreeMismatch, "extremal_polynomial_probe needs a sextic");
  if (p.is_zero()) throw Error(ErrorCode::kPrecondition, "extremal_polynomial_probe: zero polynomial");
  const double scale = p.max_abs_coefficient();
  const SexticZeros zs = polynomial_zeros(p, cfg);
  if (zs.min_value < -cfg.tol * scale) {
    throw Error(ErrorCode::kPrecondition,
                "extremal_polynomial_probe: polynomial is negative on the sphere (min " + std::to_string(zs.min_value) + ")");
  }
  const std::vector<Exponent> mons = monomials_of_degree(6);
  std::vector<Eigen::Matrix<double, 1, 28>> rows;
  int flat_directions = 0;
  for (const Vec3& z : zs.zeros) {
    std::vector<PolyJet> jets;
    jets.reserve(mons.size());
    for (const auto& e : mons) jets.push_back(monomial_jet(e, z));
    Eigen::Matrix<double, 1, 28> row;
    for (int k = 0; k < 28; ++k) row[k] = jets[k].value;
    rows.push_back(row);
    for (int a = 0; a < 3; ++a) {
      for (int k = 0; k < 28; ++k) row[k] = jets[k].grad[a];
      rows.push_back(row);
    }
    const auto u = detail::sphere_tangent(z);
    const PolyJet pj = poly_jet(p, z);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(detail::tangent_hessian(pj, u, 6));
    const double hmax = std::max(std::abs(es.eigenvalues()[1]), scale);
    for (int s = 0; s < 2; ++s) {
      if (std::abs(es.eigenvalues()[s]) > kRankCutoff * hmax) continue;
      ++flat_directions;
      const Vec3 v = u * es.eigenvectors().col(s);
      for (int a = 0; a < 3; ++a) {
        for (int k = 0; k < 28; ++k) row[k] = (jets[k].hess * v)[a];
        rows.push_back(row);
      }
    }
  }
  int rank = 0;
  if (!rows.empty()) {
    Eigen::MatrixXd a(rows.size(), 28);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const double n = rows[r].norm();
      a.row(r) = n > 0 ? (rows[r] / n).eval() : rows[r];
    }
    const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(a).singularValues();
    for (int k = 0; k < sv.size(); ++k) rank += sv[k] > kRankCutoff * sv[0] ? 1 : 0;
  }
  const int dim = 28 - rank;

  ProbeReport rep;
  rep.kind = "extremal_polynomial";
  rep.value = dim;
  nlohmann::json zeros = nlohmann::json::array();
  for (const Vec3& z : zs.zeros) zeros.push_back({z[0], z[1], z[2]});
  rep.witness = {{"zeros", zeros}, {"constraint_rows", rows.size()}, {"flat_directions", flat_directions}};
  const PerfectSquareResult sq = perfect_square_test(p, cfg.seed);
  rep.witness["perfect_square"] = sq.is_square;
  rep.verdict = (!sq.is_square && dim <= 1) ? Verdict::kConsistent : Verdict::kInconclusive;
  return rep;
}

// ---------------------------------------------------------------------------
// Polyconvexity

struct PolyconvexityResult {
  double phi = -std::numeric_limits<double>::infinity();
  NullLagrangianCoeffs c{};
};

namespace detail {

using Coeffs9 = Eigen::Matrix<double, 9, 1>;

inline Gram shifted_gram(const Gram& g, const Coeffs9& c) {
  Gram m = g;
  const auto& ns = minor_grams();
  for (int k = 0; k < 9; ++k) m -= c[k] * ns[k];
  return m;
}

// Exact lambda_min and a supergradient.
inline double phi_with_grad(const Gram& g, const Coeffs9& c, Coeffs9* grad) {
  Eigen::SelfAdjointEigenSolver<Gram> es(shifted_gram(g, c));
  if (grad) {
    const Vec9 v = es.eigenvectors().col(0);
    const auto& ns = minor_grams();
    for (int k = 0; k < 9; ++k) (*grad)[k] = -v.dot(ns[k] * v);
  }
  return es.eigenvalues()[0];
}

// Log-sum-exp smoothing of lambda_min: a concave lower bound within mu*log 9.
inline double soft_min(const Gram& g, const Coeffs9& c, double mu, Coeffs9& grad, double& exact) {
  Eigen::SelfAdjointEigenSolver<Gram> es(shifted_gram(g, c));
  const auto& lam = es.eigenvalues();
  exact = lam[0];
  Eigen::Matrix<double, 9, 1> w = (-(lam.array() - lam[0]) / mu).exp();
  const double z = w.sum();
  w /= z;
  const auto& ns = minor_grams();
  grad.setZero();
  for (int i = 0; i < 9; ++i) {
    if (w[i] < 1e-300) continue;
    const Vec9 v = es.eigenvectors().col(i);
    for (int k = 0; k < 9; ++k) grad[k] -= w[i] * v.dot(ns[k] * v);
  }
  return lam[0] - mu * std::log(z);
}

// BFGS ascent on the smoothed objective; returns the best exact phi seen.
inline double polish(const Gram& g, Coeffs9& c, double mu, int iters, double& best_exact, Coeffs9& best_c) {
  Coeffs9 grad;
  double exact;
  double f = soft_min(g, c, mu, grad, exact);
  Eigen::Matrix<double, 9, 9> h = Eigen::Matrix<double, 9, 9>::Identity();
  for (int it = 0; it < iters; ++it) {
    if (exact > best_exact) {
      best_exact = exact;
      best_c = c;
    }
    const Coeffs9 dir = h * grad;
    if (grad.norm() < 1e-15) break;
    double alpha = 1.0;
    Coeffs9 cn, gn;
    double fn = f, en = exact;
    bool ok = false;
    for (int k = 0; k < 50; ++k, alpha *= 0.5) {
      cn = c + alpha * dir;
      fn = soft_min(g, cn, mu, gn, en);
      if (fn >= f + 1e-4 * alpha * grad.dot(dir)) {
        ok = true;
        break;
      }
    }
    if (!ok) break;
    const Coeffs9 s = cn - c;
    const Coeffs9 y = gn - grad;  // ascent: curvature pair on -f
    const double sy = -s.dot(y);
    if (sy > 1e-300) {
      const Eigen::Matrix<double, 9, 9> i9 = Eigen::Matrix<double, 9, 9>::Identity();
      const double rho = 1.0 / sy;
      h = (i9 + rho * s * y.transpose()) * h * (i9 + rho * y * s.transpose()) + rho * s * s.transpose();
    }
    c = cn;
    grad = gn;
    f = fn;
    exact = en;
  }
  if (exact > best_exact) {
    best_exact = exact;
    best_c = c;
  }
  return f;
}

}  // namespace detail

/// max over c of lambda_min(Gram(q) - sum c_k N_k). Subgradient ascent from
/// seeded starts, then a smoothed BFGS polish with shrinking smoothing.
inline PolyconvexityResult polyconvexity_optimum(const QuadraticForm& q, const CertifyConfig& cfg) {
  cfg.validate();
  const Gram& g = q.gram();
  const double scale = form_scale(q);
  constexpr int kStarts = 4;
  std::mt19937_64 rng(mix_seed(cfg.seed ^ 0x504f4c59ULL));
  std::array<detail::Coeffs9, kStarts> starts;
  std::normal_distribution<double> n;
  for (int s = 0; s < kStarts; ++s)
    for (int k = 0; k < 9; ++k) starts[s][k] = s == 0 ? 0.0 : 0.5 * scale * n(rng);

  std::array<double, kStarts> best{};
  std::array<detail::Coeffs9, kStarts> best_c;
  const int iters = cfg.probe_directions * 10;
  parallel_for(kStarts, [&](std::size_t s) {
    detail::Coeffs9 c = starts[s], grad;
    best[s] = -std::numeric_limits<double>::infinity();
    for (int it = 1; it <= iters; ++it) {
      const double phi = detail::phi_with_grad(g, c, &grad);
      if (phi > best[s]) {
        best[s] = phi;
        best_c[s] = c;
      }
      const double gn = grad.norm();
      if (gn == 0.0) break;
      c += (0.5 * scale / std::sqrt(static_cast<double>(it))) * grad / gn;
    }
    detail::Coeffs9 c2 = best_c[s];
    for (double mu = 1e-1; mu >= 1e-10; mu *= 0.1) detail::polish(g, c2, mu * scale, 200, best[s], best_c[s]);
  });
  const std::size_t top = std::max_element(best.begin(), best.end()) - best.begin();
  PolyconvexityResult out;
  out.phi = best[top];
  for (int k = 0; k < 9; ++k) out.c[k] = best_c[top][k];
  return out;
}

inline ProbeReport polyconvexity_test(const QuadraticForm& q, const CertifyConfig& cfg) {
  const PolyconvexityResult r = polyconvexity_optimum(q, cfg);
  ProbeReport rep;
  rep.kind = "polyconvexity";
  rep.value = r.phi;
  rep.witness = {{"minor_coefficients", std::vector<double>(r.c.begin(), r.c.end())}, {"phi", r.phi}};
  if (r.phi >= -cfg.tol) {
    rep.verdict = Verdict::kPolyconvex;
  } else if (r.phi < -1e-5) {
    rep.verdict = Verdict::kNotPolyconvex;
  }
  return rep;
}

}  // namespace quasicone
