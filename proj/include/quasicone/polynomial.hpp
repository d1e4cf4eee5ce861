#pragma once

// Sparse homogeneous polynomials in three variables plus a small dense
// univariate type used for pencil polynomials.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "quasicone/error.hpp"

namespace quasicone {

using Exponent = std::array<int, 3>;
using Vec3 = Eigen::Vector3d;

// Relative magnitude below which a coefficient is dropped.
inline constexpr double kPruneThreshold = 1e-14;

inline int exponent_degree(const Exponent& e) { return e[0] + e[1] + e[2]; }

// Graded lexicographic order, largest first: y1^6 precedes y1^5 y2.
struct GrlexDescending {
  bool operator()(const Exponent& lhs, const Exponent& rhs) const {
    const int dl = exponent_degree(lhs);
    const int dr = exponent_degree(rhs);
    if (dl != dr) return dl > dr;
    return lhs > rhs;
  }
};

/// All exponents of total degree `degree`, in graded-lex order.
inline std::vector<Exponent> monomials_of_degree(int degree) {
  std::vector<Exponent> out;
  for (int i = degree; i >= 0; --i) {
    for (int j = degree - i; j >= 0; --j) out.push_back({i, j, degree - i - j});
  }
  return out;
}

class HomogeneousPolynomial {
 public:
  using TermMap = std::map<Exponent, double, GrlexDescending>;

  HomogeneousPolynomial() = default;
  explicit HomogeneousPolynomial(int degree) : degree_(degree) {
    if (degree < 0) throw Error(ErrorCode::kInvalidArgument, "negative polynomial degree");
  }

  static HomogeneousPolynomial monomial(const Exponent& e, double coef) {
    HomogeneousPolynomial p(exponent_degree(e));
    p.add_term(e, coef);
    return p;
  }

  int degree() const { return degree_; }
  const TermMap& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }

  double coefficient(const Exponent& e) const {
    auto it = terms_.find(e);
    return it == terms_.end() ? 0.0 : it->second;
  }

  double max_abs_coefficient() const {
    double m = 0.0;
    for (const auto& [e, c] : terms_) m = std::max(m, std::abs(c));
    return m;
  }

  /// Accumulates `coef` onto the monomial `e`; exact zeros are erased.
  void add_term(const Exponent& e, double coef) {
    if (e[0] < 0 || e[1] < 0 || e[2] < 0 || exponent_degree(e) != degree_) {
      throw Error(ErrorCode::kInvalidArgument,
                  "exponent does not match polynomial degree " + std::to_string(degree_));
    }
    if (coef == 0.0) return;
    auto [it, inserted] = terms_.try_emplace(e, coef);
    if (!inserted) {
      it->second += coef;
      if (it->second == 0.0) terms_.erase(it);
    }
  }

  /// Drops coefficients below kPruneThreshold times the largest magnitude.
  void prune() {
    const double cutoff = kPruneThreshold * max_abs_coefficient();
    std::erase_if(terms_, [cutoff](const auto& kv) { return std::abs(kv.second) <= cutoff; });
  }

  friend bool operator==(const HomogeneousPolynomial&, const HomogeneousPolynomial&) = default;

 private:
  int degree_ = 0;
  TermMap terms_;
};

inline double poly_eval(const HomogeneousPolynomial& p, const Vec3& point) {
  double sum = 0.0;
  for (const auto& [e, c] : p.terms()) {
    sum += c * std::pow(point[0], e[0]) * std::pow(point[1], e[1]) * std::pow(point[2], e[2]);
  }
  return sum;
}

inline HomogeneousPolynomial poly_combine(const HomogeneousPolynomial& p,
                                          const HomogeneousPolynomial& q, double alpha,
                                          double beta) {
  if (p.degree() != q.degree()) {
    throw Error(ErrorCode::kDegreeMismatch, "poly_combine: degrees " + std::to_string(p.degree()) +
                                                " and " + std::to_string(q.degree()) + " differ");
  }
  HomogeneousPolynomial out(p.degree());
  for (const auto& [e, c] : p.terms()) out.add_term(e, alpha * c);
  for (const auto& [e, c] : q.terms()) out.add_term(e, beta * c);
  out.prune();
  return out;
}

inline HomogeneousPolynomial poly_scale(const HomogeneousPolynomial& p, double alpha) {
  HomogeneousPolynomial out(p.degree());
  for (const auto& [e, c] : p.terms()) out.add_term(e, alpha * c);
  return out;
}

inline HomogeneousPolynomial poly_mul(const HomogeneousPolynomial& p,
                                      const HomogeneousPolynomial& q) {
  HomogeneousPolynomial out(p.degree() + q.degree());
  for (const auto& [ep, cp] : p.terms()) {
    for (const auto& [eq, cq] : q.terms()) {
      out.add_term({ep[0] + eq[0], ep[1] + eq[1], ep[2] + eq[2]}, cp * cq);
    }
  }
  out.prune();
  return out;
}

/// max |p_e - q_e| over the union of supports, against tol * (1 + max |coef|).
inline double poly_max_difference(const HomogeneousPolynomial& p, const HomogeneousPolynomial& q) {
  double diff = 0.0;
  for (const auto& [e, c] : p.terms()) diff = std::max(diff, std::abs(c - q.coefficient(e)));
  for (const auto& [e, c] : q.terms()) diff = std::max(diff, std::abs(c - p.coefficient(e)));
  return diff;
}

inline bool poly_equal_within(const HomogeneousPolynomial& p, const HomogeneousPolynomial& q,
                              double tol) {
  if (tol < 0) throw Error(ErrorCode::kInvalidArgument, "poly_equal_within: negative tolerance");
  if (p.degree() != q.degree() && !(p.is_zero() && q.is_zero())) return false;
  const double scale = 1.0 + std::max(p.max_abs_coefficient(), q.max_abs_coefficient());
  return poly_max_difference(p, q) <= tol * scale;
}

inline std::string format_monomial(const Exponent& e) {
  std::string s;
  for (int i = 0; i < 3; ++i) {
    if (e[i] == 0) continue;
    if (!s.empty()) s += '*';
    s += "y" + std::to_string(i + 1);
    if (e[i] > 1) s += "^" + std::to_string(e[i]);
  }
  return s.empty() ? "1" : s;
}

/// Human-readable rendering; `order` overrides the default graded-lex order.
inline std::string format_polynomial(const HomogeneousPolynomial& p,
                                     std::span<const Exponent> order = {}) {
  std::vector<std::pair<Exponent, double>> terms;
  if (order.empty()) {
    terms.assign(p.terms().begin(), p.terms().end());
  } else {
    for (const auto& e : order) {
      if (double c = p.coefficient(e); c != 0.0) terms.emplace_back(e, c);
    }
    for (const auto& [e, c] : p.terms()) {
      if (std::find(order.begin(), order.end(), e) == order.end()) terms.emplace_back(e, c);
    }
  }
  if (terms.empty()) return "0";
  std::string out;
  char buf[64];
  for (const auto& [e, c] : terms) {
    const double mag = std::abs(c);
    if (out.empty()) {
      if (c < 0) out += "-";
    } else {
      out += c < 0 ? " - " : " + ";
    }
    const bool unit = mag == 1.0 && exponent_degree(e) > 0;
    if (!unit) {
      std::snprintf(buf, sizeof buf, "%.17g", mag);
      out += buf;
      if (exponent_degree(e) > 0) out += "*";
    }
    if (exponent_degree(e) > 0) out += format_monomial(e);
  }
  return out;
}

inline void to_json(nlohmann::json& j, const HomogeneousPolynomial& p) {
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& [e, c] : p.terms()) terms.push_back({{"exp", e}, {"coef", c}});
  j = {{"degree", p.degree()}, {"terms", std::move(terms)}};
}

inline void from_json(const nlohmann::json& j, HomogeneousPolynomial& p) {
  if (!j.is_object() || !j.contains("degree") || !j.contains("terms")) {
    throw Error(ErrorCode::kParse, "polynomial: expected object with 'degree' and 'terms'");
  }
  p = HomogeneousPolynomial(j.at("degree").get<int>());
  for (const auto& t : j.at("terms")) {
    p.add_term(t.at("exp").get<Exponent>(), t.at("coef").get<double>());
  }
}

// ---------------------------------------------------------------------------

class UnivariatePolynomial {
 public:
  UnivariatePolynomial() = default;
  explicit UnivariatePolynomial(std::vector<double> coefficients)
      : coefficients_(std::move(coefficients)) {
    trim();
  }

  const std::vector<double>& coefficients() const { return coefficients_; }
  int degree() const { return coefficients_.empty() ? -1 : static_cast<int>(coefficients_.size()) - 1; }
  bool is_zero() const { return coefficients_.empty(); }

  double coefficient(std::size_t power) const {
    return power < coefficients_.size() ? coefficients_[power] : 0.0;
  }

  double operator()(double t) const {
    double acc = 0.0;
    for (auto it = coefficients_.rbegin(); it != coefficients_.rend(); ++it) acc = acc * t + *it;
    return acc;
  }

 private:
  void trim() {
    double m = 0.0;
    for (double c : coefficients_) m = std::max(m, std::abs(c));
    const double cutoff = kPruneThreshold * m;
    while (!coefficients_.empty() && std::abs(coefficients_.back()) <= cutoff) coefficients_.pop_back();
  }

  std::vector<double> coefficients_;
};

struct Sample {
  double t;
  double value;
};

struct InterpolationResult {
  UnivariatePolynomial poly;
  /// Length degree+1 before trimming; useful when callers index by power.
  std::vector<double> raw_coefficients;
  /// max |fit(t_i) - v_i| / max(1, max |v_i|).
  double residual = 0.0;
};

/// `degree + 1` equally spaced abscissae on [0, 2].
inline std::vector<double> default_abscissae(int degree) {
  std::vector<double> ts(static_cast<std::size_t>(degree) + 1);
  for (int i = 0; i <= degree; ++i) ts[i] = degree == 0 ? 0.0 : 2.0 * i / degree;
  return ts;
}

inline InterpolationResult univariate_from_samples(std::span<const Sample> samples, int degree) {
  if (degree < 0) throw Error(ErrorCode::kInvalidArgument, "interpolation degree must be >= 0");
  std::vector<double> ts;
  for (const auto& s : samples) ts.push_back(s.t);
  std::sort(ts.begin(), ts.end());
  const auto distinct = std::unique(ts.begin(), ts.end()) - ts.begin();
  if (distinct < degree + 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "interpolation needs " + std::to_string(degree + 1) + " distinct abscissae, got " +
                    std::to_string(distinct));
  }

  const auto rows = static_cast<Eigen::Index>(samples.size());
  const Eigen::Index cols = degree + 1;
  double tscale = 0.0;
  for (const auto& s : samples) tscale = std::max(tscale, std::abs(s.t));
  if (tscale == 0.0) tscale = 1.0;

  // Vandermonde in the scaled variable t / tscale keeps columns comparable.
  Eigen::MatrixXd v(rows, cols);
  Eigen::VectorXd rhs(rows);
  double vmax = 0.0;
  for (Eigen::Index r = 0; r < rows; ++r) {
    const double u = samples[r].t / tscale;
    double pw = 1.0;
    for (Eigen::Index c = 0; c < cols; ++c, pw *= u) v(r, c) = pw;
    rhs[r] = samples[r].value;
    vmax = std::max(vmax, std::abs(rhs[r]));
  }
  Eigen::VectorXd scaled = v.colPivHouseholderQr().solve(rhs);

  InterpolationResult out;
  out.raw_coefficients.resize(cols);
  double unscale = 1.0;
  for (Eigen::Index c = 0; c < cols; ++c, unscale /= tscale) out.raw_coefficients[c] = scaled[c] * unscale;
  out.poly = UnivariatePolynomial(out.raw_coefficients);
  const Eigen::VectorXd fit = v * scaled;
  out.residual = (fit - rhs).cwiseAbs().maxCoeff() / std::max(1.0, vmax);
  return out;
}

}  // namespace quasicone
