#pragma once

// det T(y) as a sextic: symbolic cofactor expansion, the closed form for the
// paired orthotropic layout, perfect-square detection, and the pencil
// proportionality check det(T - lambda T1) = c(lambda) det(T).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "quasicone/error.hpp"
#include "quasicone/forms.hpp"
#include "quasicone/polynomial.hpp"

namespace quasicone {

inline HomogeneousPolynomial acoustic_det(const AcousticMatrix& t) {
  const auto minor = [&t](int r1, int r2, int c1, int c2) {
    return poly_combine(poly_mul(t(r1, c1), t(r2, c2)), poly_mul(t(r1, c2), t(r2, c1)), 1.0, -1.0);
  };
  HomogeneousPolynomial det(6);
  det = poly_combine(det, poly_mul(t(0, 0), minor(1, 2, 1, 2)), 1.0, 1.0);
  det = poly_combine(det, poly_mul(t(0, 1), minor(1, 2, 0, 2)), 1.0, -1.0);
  det = poly_combine(det, poly_mul(t(0, 2), minor(1, 2, 0, 1)), 1.0, 1.0);
  return det;
}

/// The ten monomials of the paired-layout determinant, in the order the
/// closed form lists them.
inline const std::array<Exponent, 10>& closed_form_monomials() {
  static const std::array<Exponent, 10> order{{{6, 0, 0},
                                               {0, 6, 0},
                                               {0, 0, 6},
                                               {4, 2, 0},
                                               {2, 4, 0},
                                               {4, 0, 2},
                                               {2, 0, 4},
                                               {0, 4, 2},
                                               {0, 2, 4},
                                               {2, 2, 2}}};
  return order;
}

inline HomogeneousPolynomial reduced_det_closed_form(const ReducedOrthotropicForm& r) {
  const double a11 = r.a(0, 0), a22 = r.a(1, 1), a33 = r.a(2, 2);
  const double a12 = r.a(0, 1), a13 = r.a(0, 2), a23 = r.a(1, 2);
  const double b = r.b, c = r.c, d = r.d;
  const std::array<double, 10> coef{
      a11 * b * c,
      a22 * b * d,
      a33 * c * d,
      a11 * b * d + a11 * a22 * c + b * b * c - a12 * a12 * c,
      a22 * b * c + a11 * a22 * d + b * b * d - a12 * a12 * d,
      a11 * c * d + a11 * a33 * b + c * c * b - a13 * a13 * b,
      a33 * b * c + a11 * a33 * d + c * c * d - a13 * a13 * d,
      a22 * c * d + a22 * a33 * b + d * d * b - a23 * a23 * b,
      a33 * b * d + a22 * a33 * c + d * d * c - a23 * a23 * c,
      a11 * a22 * a33 + 2 * a12 * a13 * a23 - a11 * a23 * a23 - a22 * a13 * a13 - a33 * a12 * a12 +
          a11 * d * d + a22 * c * c + a33 * b * b + 2 * b * c * d,
  };
  HomogeneousPolynomial p(6);
  for (std::size_t k = 0; k < coef.size(); ++k) p.add_term(closed_form_monomials()[k], coef[k]);
  p.prune();
  return p;
}

// ---------------------------------------------------------------------------
// Perfect squares

struct PerfectSquareResult {
  bool is_square = false;
  std::optional<HomogeneousPolynomial> root;
  /// ||S^2 - p|| / ||p|| of the best fit; 0 when decided by the support rule.
  double residual = 0.0;
  /// "support_rule" or "fit".
  std::string method;
};

namespace detail {

struct SquareFitTables {
  std::vector<Exponent> cubic = monomials_of_degree(3);
  std::vector<Exponent> sextic = monomials_of_degree(6);
  std::array<std::array<int, 10>, 10> product{};

  SquareFitTables() {
    for (int k = 0; k < 10; ++k) {
      for (int l = 0; l < 10; ++l) {
        const Exponent e{cubic[k][0] + cubic[l][0], cubic[k][1] + cubic[l][1], cubic[k][2] + cubic[l][2]};
        product[k][l] = static_cast<int>(std::find(sextic.begin(), sextic.end(), e) - sextic.begin());
      }
    }
  }
};

inline const SquareFitTables& square_tables() {
  static const SquareFitTables tables;
  return tables;
}

using Cubic = Eigen::Matrix<double, 10, 1>;
using Sextic = Eigen::Matrix<double, 28, 1>;

inline Sextic square_coefficients(const Cubic& s) {
  const auto& tb = square_tables();
  Sextic out = Sextic::Zero();
  for (int k = 0; k < 10; ++k)
    for (int l = 0; l < 10; ++l) out[tb.product[k][l]] += s[k] * s[l];
  return out;
}

/// Levenberg-Marquardt on ||S^2 - target||^2; returns the final residual norm.
inline double fit_square(const Sextic& target, Cubic& s, int iterations) {
  const auto& tb = square_tables();
  double mu = 1e-3;
  Sextic r = square_coefficients(s) - target;
  double cost = r.squaredNorm();
  for (int it = 0; it < iterations && cost > 0; ++it) {
    Eigen::Matrix<double, 28, 10> jac = Eigen::Matrix<double, 28, 10>::Zero();
    for (int k = 0; k < 10; ++k)
      for (int l = 0; l < 10; ++l) jac(tb.product[k][l], k) += 2.0 * s[l];
    const Eigen::Matrix<double, 10, 10> jtj = jac.transpose() * jac;
    const Cubic g = jac.transpose() * r;
    bool improved = false;
    for (int tries = 0; tries < 12; ++tries) {
      Eigen::Matrix<double, 10, 10> lhs = jtj;
      lhs.diagonal().array() += mu * (1.0 + jtj.diagonal().array());
      const Cubic step = lhs.ldlt().solve(-g);
      const Cubic trial = s + step;
      const Sextic rt = square_coefficients(trial) - target;
      if (const double ct = rt.squaredNorm(); ct < cost) {
        s = trial;
        r = rt;
        cost = ct;
        mu = std::max(mu * 0.3, 1e-15);
        improved = true;
        break;
      }
      mu *= 10.0;
    }
    if (!improved) break;
  }
  return std::sqrt(cost);
}

}  // namespace detail

/// Sextics supported on the closed-form monomials with all three pure sixth
/// powers present cannot be squares: a cubic root would need y_i^3 terms, and
/// any y_i^2 y_j or y1y2y3 term then creates y_i^5 y_j or y_i^4 y_j y_k, while
/// the surviving sum of a_i y_i^3 squares to y_i^3 y_j^3 cross terms.
inline bool support_rule_applies(const HomogeneousPolynomial& p) {
  if (p.degree() != 6 || p.is_zero()) return false;
  const auto& allowed = closed_form_monomials();
  for (const auto& [e, c] : p.terms()) {
    if (std::find(allowed.begin(), allowed.end(), e) == allowed.end()) return false;
  }
  const double floor = 1e-12 * p.max_abs_coefficient();
  for (int i = 0; i < 3; ++i) {
    Exponent e{0, 0, 0};
    e[i] = 6;
    if (std::abs(p.coefficient(e)) <= floor) return false;
  }
  return true;
}

inline PerfectSquareResult perfect_square_test(const HomogeneousPolynomial& p, std::uint64_t seed = 0x5157) {
  if (p.degree() != 6) {
    throw Error(ErrorCode::kDegreeMismatch, "perfect_square_test needs a sextic, got degree " + std::to_string(p.degree()));
  }
  PerfectSquareResult out;
  if (p.is_zero()) {
    out.is_square = true;
    out.root = HomogeneousPolynomial(3);
    out.method = "fit";
    return out;
  }
  if (support_rule_applies(p)) {
    out.method = "support_rule";
    return out;
  }

  const auto& tb = detail::square_tables();
  detail::Sextic target;
  for (int k = 0; k < 28; ++k) target[k] = p.coefficient(tb.sextic[k]);
  const double norm = target.norm();

  std::vector<detail::Cubic> starts;
  // Square roots of dominant even monomials c*y^(2e) -> sqrt(c)*y^e.
  for (int k = 0; k < 10; ++k) {
    const Exponent& e = tb.cubic[k];
    const double c = p.coefficient({2 * e[0], 2 * e[1], 2 * e[2]});
    if (c > 0) {
      detail::Cubic s = detail::Cubic::Zero();
      s[k] = std::sqrt(c);
      starts.push_back(s);
    }
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  const std::size_t dominant = starts.size();
  for (std::size_t k = 0; k < dominant; ++k) {
    detail::Cubic s = starts[k];
    for (int m = 0; m < 10; ++m) s[m] += 0.3 * std::sqrt(norm) * gauss(rng);
    starts.push_back(s);
  }
  for (int k = 0; k < 16; ++k) {
    detail::Cubic s;
    for (int m = 0; m < 10; ++m) s[m] = std::sqrt(norm / 10.0) * gauss(rng);
    starts.push_back(s);
  }

  double best = std::numeric_limits<double>::infinity();
  detail::Cubic best_s = detail::Cubic::Zero();
  for (auto s : starts) {
    const double res = detail::fit_square(target, s, 300) / norm;
    if (res < best) {
      best = res;
      best_s = s;
    }
    if (best <= 1e-14) break;
  }
  out.method = "fit";
  out.residual = best;
  out.is_square = best <= 1e-8;
  if (out.is_square) {
    for (int k = 0; k < 10; ++k) {
      if (std::abs(best_s[k]) > 1e-12 * best_s.cwiseAbs().maxCoeff()) {
        if (best_s[k] < 0) best_s = -best_s;
        break;
      }
    }
    HomogeneousPolynomial root(3);
    for (int k = 0; k < 10; ++k) root.add_term(tb.cubic[k], best_s[k]);
    root.prune();
    out.root = root;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Pencil identity

struct PencilSample {
  double lambda;
  double mu;         ///< best scalar with det(T - lambda T1) ~ mu det(T)
  double residual;   ///< relative coefficient distance at that mu
};

struct PencilReport {
  std::vector<PencilSample> samples;
  double max_residual = 0.0;
  bool proportional = false;
  /// Coefficients of 1 - gamma*l + beta*l^2 - alpha*l^3, filled when proportional.
  std::optional<double> constant, gamma, beta, alpha;
};

inline constexpr double kProportionalityTolerance = 1e-8;

inline Eigen::VectorXd sextic_vector(const HomogeneousPolynomial& p) {
  const auto& mons = detail::square_tables().sextic;
  Eigen::VectorXd v(static_cast<Eigen::Index>(mons.size()));
  for (std::size_t k = 0; k < mons.size(); ++k) v[static_cast<Eigen::Index>(k)] = p.coefficient(mons[k]);
  return v;
}

inline PencilReport pencil_identity_check(const QuadraticForm& q, const QuadraticForm& q1,
                                          std::vector<double> lambdas = {}) {
  if (lambdas.empty()) lambdas = {0.0, 0.5, 1.0, 1.5, 2.0};
  const AcousticMatrix t = acoustic_matrix(q);
  const AcousticMatrix t1 = acoustic_matrix(q1);
  const Eigen::VectorXd base = sextic_vector(acoustic_det(t));
  const double base_sq = base.squaredNorm();
  if (base_sq == 0.0 || base.cwiseAbs().maxCoeff() <= 1e-14 * (1.0 + q.gram().cwiseAbs().maxCoeff())) {
    throw Error(ErrorCode::kPrecondition, "det T(y) vanishes identically; proportionality is undefined");
  }

  PencilReport rep;
  std::vector<Sample> fit;
  for (double lam : lambdas) {
    const Eigen::VectorXd v = sextic_vector(acoustic_det(combine(t, t1, 1.0, -lam)));
    const double mu = v.dot(base) / base_sq;
    const double denom = std::max(v.norm(), std::abs(mu) * std::sqrt(base_sq));
    const double res = denom == 0.0 ? 0.0 : (v - mu * base).norm() / denom;
    rep.samples.push_back({lam, mu, res});
    rep.max_residual = std::max(rep.max_residual, res);
    fit.push_back({lam, mu});
  }
  rep.proportional = rep.max_residual <= kProportionalityTolerance;
  std::vector<double> distinct = lambdas;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (rep.proportional && distinct.size() >= 4) {
    const auto cubic = univariate_from_samples(fit, 3);
    rep.constant = cubic.raw_coefficients[0];
    rep.gamma = -cubic.raw_coefficients[1];
    rep.beta = cubic.raw_coefficients[2];
    rep.alpha = -cubic.raw_coefficients[3];
  }
  return rep;
}

// ---------------------------------------------------------------------------

struct DetReport {
  HomogeneousPolynomial det{6};
  std::optional<double> closed_form_residual;
  bool is_perfect_square = false;
  std::optional<HomogeneousPolynomial> square_root;
  std::string perfect_square_method;
  double perfect_square_residual = 0.0;
};

/// Determinant analysis; `reduced` enables the closed-form cross-check.
inline DetReport analyze_determinant(const QuadraticForm& q, const std::optional<ReducedOrthotropicForm>& reduced) {
  DetReport rep;
  rep.det = acoustic_det(acoustic_matrix(q));
  if (reduced) {
    const HomogeneousPolynomial closed = reduced_det_closed_form(*reduced);
    const double scale = 1.0 + std::max(closed.max_abs_coefficient(), rep.det.max_abs_coefficient());
    rep.closed_form_residual = poly_max_difference(rep.det, closed) / scale;
  }
  if (!rep.det.is_zero()) {
    const auto sq = perfect_square_test(rep.det);
    rep.is_perfect_square = sq.is_square;
    rep.square_root = sq.root;
    rep.perfect_square_method = sq.method;
    rep.perfect_square_residual = sq.residual;
  } else {
    rep.is_perfect_square = true;
    rep.square_root = HomogeneousPolynomial(3);
    rep.perfect_square_method = "zero";
  }
  return rep;
}

inline void to_json(nlohmann::json& j, const DetReport& r) {
  j = {{"det", r.det},
       {"det_pretty", format_polynomial(r.det, closed_form_monomials())},
       {"is_perfect_square", r.is_perfect_square},
       {"perfect_square_method", r.perfect_square_method},
       {"perfect_square_residual", r.perfect_square_residual}};
  j["closed_form_residual"] = r.closed_form_residual ? nlohmann::json(*r.closed_form_residual) : nlohmann::json();
  j["square_root"] = r.square_root ? nlohmann::json(*r.square_root) : nlohmann::json();
}

}  // namespace quasicone
