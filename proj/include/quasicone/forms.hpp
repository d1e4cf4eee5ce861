#pragma once

// Quadratic forms on 3x3 matrices, stored as 9x9 Gram matrices over the
// row-major vectorization (i,j) -> 3*i + j (0-based).

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "quasicone/error.hpp"
#include "quasicone/polynomial.hpp"

namespace quasicone {

using Mat3 = Eigen::Matrix3d;
using Vec9 = Eigen::Matrix<double, 9, 1>;
using Gram = Eigen::Matrix<double, 9, 9>;

constexpr int entry_index(int i, int j) { return 3 * i + j; }

inline Vec9 vectorize(const Mat3& xi) {
  Vec9 v;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) v[entry_index(i, j)] = xi(i, j);
  return v;
}

class QuadraticForm {
 public:
  QuadraticForm() : gram_(Gram::Zero()) {}

  /// Symmetrizes the input; asymmetry beyond 1e-12 relative is rejected.
  explicit QuadraticForm(const Gram& gram) {
    const double scale = std::max(1.0, gram.cwiseAbs().maxCoeff());
    if ((gram - gram.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
      throw Error(ErrorCode::kInvalidArgument, "Gram matrix is not symmetric");
    }
    gram_ = 0.5 * (gram + gram.transpose());
  }

  static QuadraticForm zero() { return QuadraticForm(); }

  const Gram& gram() const { return gram_; }

  double operator()(const Mat3& xi) const {
    const Vec9 v = vectorize(xi);
    return v.dot(gram_ * v);
  }

  QuadraticForm operator+(const QuadraticForm& o) const { return from_trusted(gram_ + o.gram_); }
  QuadraticForm operator-(const QuadraticForm& o) const { return from_trusted(gram_ - o.gram_); }
  QuadraticForm operator*(double s) const { return from_trusted(s * gram_); }
  friend QuadraticForm operator*(double s, const QuadraticForm& q) { return q * s; }

  /// Adds weight * (coeffs . vec(xi))^2.
  void add_square(const Vec9& coeffs, double weight) { gram_ += weight * coeffs * coeffs.transpose(); }

  /// Adds weight * xi_a * xi_b (a == b gives weight * xi_a^2).
  void add_product(int a, int b, double weight) {
    if (a == b) {
      gram_(a, a) += weight;
    } else {
      gram_(a, b) += 0.5 * weight;
      gram_(b, a) += 0.5 * weight;
    }
  }

  double norm() const { return gram_.norm(); }

 private:
  static QuadraticForm from_trusted(const Gram& g) {
    QuadraticForm q;
    q.gram_ = g;
    return q;
  }

  Gram gram_;
};

// ---------------------------------------------------------------------------
// Orthotropic parameterizations

struct OrthotropicCoefficients {
  double c11 = 0, c22 = 0, c33 = 0;
  double c12 = 0, c13 = 0, c23 = 0;
  double c44 = 0, c55 = 0, c66 = 0;
};

struct ReducedOrthotropicForm {
  Mat3 a = Mat3::Zero();
  double b = 0, c = 0, d = 0;

  static constexpr int kParameterCount = 9;

  /// (a11, a22, a33, a12, a13, a23, b, c, d).
  Eigen::Matrix<double, 9, 1> parameters() const {
    Eigen::Matrix<double, 9, 1> p;
    p << a(0, 0), a(1, 1), a(2, 2), a(0, 1), a(0, 2), a(1, 2), b, c, d;
    return p;
  }

  static ReducedOrthotropicForm from_parameters(const Eigen::Matrix<double, 9, 1>& p) {
    ReducedOrthotropicForm r;
    r.a << p[0], p[3], p[4], p[3], p[1], p[5], p[4], p[5], p[2];
    r.b = p[6];
    r.c = p[7];
    r.d = p[8];
    return r;
  }
};

/// Checks the strict positivity of a11, a22, a33, b, c, d; returns the name
/// of the first failing parameter.
inline std::optional<std::string> strict_positivity_violation(const ReducedOrthotropicForm& r) {
  const std::array<std::pair<const char*, double>, 6> checks{{{"a11 (C11)", r.a(0, 0)},
                                                              {"a22 (C22)", r.a(1, 1)},
                                                              {"a33 (C33)", r.a(2, 2)},
                                                              {"b (C66)", r.b},
                                                              {"c (C55)", r.c},
                                                              {"d (C44)", r.d}}};
  for (const auto& [name, v] : checks) {
    if (!(v > 0.0)) return std::string(name) + " must be strictly positive, got " + std::to_string(v);
  }
  return std::nullopt;
}

// Null-Lagrangian basis: the nine 2x2 minors, rows {r1,r2} then cols {c1,c2},
// both pairs in lexicographic order (01, 02, 12).
using NullLagrangianCoeffs = std::array<double, 9>;

struct MinorIndex {
  int r1, r2, c1, c2;
};

inline constexpr std::array<MinorIndex, 9> kMinors = [] {
  constexpr std::array<std::pair<int, int>, 3> pairs{{{0, 1}, {0, 2}, {1, 2}}};
  std::array<MinorIndex, 9> out{};
  int k = 0;
  for (auto [r1, r2] : pairs)
    for (auto [c1, c2] : pairs) out[k++] = {r1, r2, c1, c2};
  return out;
}();

/// Gram matrix of the minor xi[r1][c1] xi[r2][c2] - xi[r1][c2] xi[r2][c1].
inline Gram minor_gram(int k) {
  const auto& m = kMinors.at(k);
  QuadraticForm q;
  q.add_product(entry_index(m.r1, m.c1), entry_index(m.r2, m.c2), 1.0);
  q.add_product(entry_index(m.r1, m.c2), entry_index(m.r2, m.c1), -1.0);
  return q.gram();
}

inline const std::array<Gram, 9>& minor_grams() {
  static const std::array<Gram, 9> grams = [] {
    std::array<Gram, 9> g;
    for (int k = 0; k < 9; ++k) g[k] = minor_gram(k);
    return g;
  }();
  return grams;
}

inline QuadraticForm add_null_lagrangian(const QuadraticForm& q, const NullLagrangianCoeffs& n) {
  Gram g = q.gram();
  for (int k = 0; k < 9; ++k) g += n[k] * minor_grams()[k];
  return QuadraticForm(g);
}

// ---------------------------------------------------------------------------
// Evaluation

inline Mat3 outer(const Vec3& x, const Vec3& y) { return x * y.transpose(); }

inline double biquadratic_eval(const QuadraticForm& q, const Vec3& x, const Vec3& y) {
  return q(outer(x, y));
}

inline QuadraticForm form_from_voigt(const OrthotropicCoefficients& c) {
  QuadraticForm q;
  const double cm[3][3] = {{c.c11, c.c12, c.c13}, {c.c12, c.c22, c.c23}, {c.c13, c.c23, c.c33}};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) q.add_product(entry_index(i, i), entry_index(j, j), cm[i][j]);
  const auto shear = [&q](int i, int j, double w) {
    Vec9 v = Vec9::Zero();
    v[entry_index(i, j)] = 1.0;
    v[entry_index(j, i)] = 1.0;
    q.add_square(v, w);
  };
  shear(1, 2, c.c44);
  shear(2, 0, c.c55);
  shear(0, 1, c.c66);
  return q;
}

inline QuadraticForm form_from_reduced(const ReducedOrthotropicForm& r) {
  QuadraticForm q;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) q.add_product(entry_index(i, i), entry_index(j, j), r.a(i, j));
  const auto pair = [&q](int i, int j, double w) {
    q.add_product(entry_index(i, j), entry_index(i, j), w);
    q.add_product(entry_index(j, i), entry_index(j, i), w);
  };
  pair(0, 1, r.b);
  pair(0, 2, r.c);
  pair(1, 2, r.d);
  return q;
}

/// Forms sum a_ij xi_ii xi_jj + b xi12^2 + c xi23^2 + d xi31^2 (one shear
/// entry per pair); these go through the general Gram path.
inline QuadraticForm form_from_single_shear(const Mat3& a, double b, double c, double d) {
  QuadraticForm q;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) q.add_product(entry_index(i, i), entry_index(j, j), a(i, j));
  q.add_product(entry_index(0, 1), entry_index(0, 1), b);
  q.add_product(entry_index(1, 2), entry_index(1, 2), c);
  q.add_product(entry_index(2, 0), entry_index(2, 0), d);
  return q;
}

namespace detail {

// Deterministic rank-one sample pairs shared by construction-time checks.
inline const std::vector<std::pair<Vec3, Vec3>>& rank_one_check_points() {
  static const std::vector<std::pair<Vec3, Vec3>> points = [] {
    std::mt19937_64 rng(0x5eed0001);
    std::normal_distribution<double> g;
    std::vector<std::pair<Vec3, Vec3>> out;
    for (int k = 0; k < 64; ++k) {
      Vec3 x(g(rng), g(rng), g(rng)), y(g(rng), g(rng), g(rng));
      out.emplace_back(x.normalized(), y.normalized());
    }
    return out;
  }();
  return points;
}

}  // namespace detail

/// Max relative disagreement of two forms on the deterministic rank-one samples.
inline double rank_one_disagreement(const QuadraticForm& p, const QuadraticForm& q) {
  const double scale = 1.0 + std::max(p.gram().cwiseAbs().maxCoeff(), q.gram().cwiseAbs().maxCoeff());
  double worst = 0.0;
  for (const auto& [x, y] : detail::rank_one_check_points()) {
    worst = std::max(worst, std::abs(biquadratic_eval(p, x, y) - biquadratic_eval(q, x, y)));
  }
  return worst / scale;
}

inline ReducedOrthotropicForm reduce_modulo_null_lagrangians(const OrthotropicCoefficients& c) {
  ReducedOrthotropicForm r;
  r.a << c.c11, c.c12 + c.c66, c.c13 + c.c55,  //
      c.c12 + c.c66, c.c22, c.c23 + c.c44,    //
      c.c13 + c.c55, c.c23 + c.c44, c.c33;
  r.b = c.c66;
  r.c = c.c55;
  r.d = c.c44;
  // The shear cross terms 2*C66*xi11*xi22 etc. move into a_ij; confirm on
  // rank-one samples rather than trusting the sign convention.
  if (const double err = rank_one_disagreement(form_from_voigt(c), form_from_reduced(r)); err > 1e-11) {
    throw Error(ErrorCode::kPrecondition,
                "reduced form disagrees with Voigt form on rank-one samples (" + std::to_string(err) + ")");
  }
  return r;
}

// ---------------------------------------------------------------------------
// Acoustic matrix

/// Dense coefficients of T(y): entry (i,k) = sum_m coeff[i][k][m] * w_m(y),
/// with w = (y1^2, y2^2, y3^2, y1y2, y1y3, y2y3).
struct AcousticCoefficients {
  std::array<std::array<std::array<double, 6>, 3>, 3> c{};

  static std::array<double, 6> weights(const Vec3& y) {
    return {y[0] * y[0], y[1] * y[1], y[2] * y[2], y[0] * y[1], y[0] * y[2], y[1] * y[2]};
  }

  Mat3 evaluate(const std::array<double, 6>& w) const {
    Mat3 t;
    for (int i = 0; i < 3; ++i) {
      for (int k = i; k < 3; ++k) {
        double s = 0.0;
        for (int m = 0; m < 6; ++m) s += c[i][k][m] * w[m];
        t(i, k) = s;
        t(k, i) = s;
      }
    }
    return t;
  }

  Mat3 evaluate(const Vec3& y) const { return evaluate(weights(y)); }
};

inline AcousticCoefficients acoustic_coefficients(const QuadraticForm& q) {
  // Monomial slot for y_j y_l.
  constexpr int slot[3][3] = {{0, 3, 4}, {3, 1, 5}, {4, 5, 2}};
  const Gram& g = q.gram();
  AcousticCoefficients out;
  for (int i = 0; i < 3; ++i)
    for (int k = i; k < 3; ++k)
      for (int j = 0; j < 3; ++j)
        for (int l = 0; l < 3; ++l) out.c[i][k][slot[j][l]] += g(entry_index(i, j), entry_index(k, l));
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < i; ++k) out.c[i][k] = out.c[k][i];
  return out;
}

/// The y-matrix S(x) with Q(x (x) y) = y . S(x) . y, the transpose role of T.
inline Mat3 x_matrix(const QuadraticForm& q, const Vec3& x) {
  const Gram& g = q.gram();
  Mat3 s = Mat3::Zero();
  for (int j = 0; j < 3; ++j)
    for (int l = 0; l < 3; ++l)
      for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k) s(j, l) += g(entry_index(i, j), entry_index(k, l)) * x[i] * x[k];
  return 0.5 * (s + s.transpose());
}

class AcousticMatrix {
 public:
  AcousticMatrix() {
    for (auto& row : entries_)
      for (auto& e : row) e = HomogeneousPolynomial(2);
  }

  const HomogeneousPolynomial& operator()(int i, int k) const { return entries_[i][k]; }

  /// Writes both (i,k) and (k,i).
  void set(int i, int k, const HomogeneousPolynomial& p) {
    if (p.degree() != 2 && !p.is_zero()) throw Error(ErrorCode::kInvalidArgument, "acoustic entries are quadratic");
    entries_[i][k] = p;
    entries_[k][i] = p;
  }

  Mat3 evaluate(const Vec3& y) const {
    Mat3 t;
    for (int i = 0; i < 3; ++i)
      for (int k = 0; k < 3; ++k) t(i, k) = poly_eval(entries_[i][k], y);
    return t;
  }

  AcousticMatrix scaled(double s) const {
    AcousticMatrix out;
    for (int i = 0; i < 3; ++i)
      for (int k = i; k < 3; ++k) out.set(i, k, poly_scale(entries_[i][k], s));
    return out;
  }

  friend AcousticMatrix combine(const AcousticMatrix& t, const AcousticMatrix& u, double alpha, double beta) {
    AcousticMatrix out;
    for (int i = 0; i < 3; ++i)
      for (int k = i; k < 3; ++k) out.set(i, k, poly_combine(t(i, k), u(i, k), alpha, beta));
    return out;
  }

 private:
  std::array<std::array<HomogeneousPolynomial, 3>, 3> entries_;
};

inline AcousticMatrix acoustic_matrix(const QuadraticForm& q) {
  static const std::array<Exponent, 6> exps{{{2, 0, 0}, {0, 2, 0}, {0, 0, 2}, {1, 1, 0}, {1, 0, 1}, {0, 1, 1}}};
  const AcousticCoefficients ac = acoustic_coefficients(q);
  AcousticMatrix t;
  for (int i = 0; i < 3; ++i) {
    for (int k = i; k < 3; ++k) {
      HomogeneousPolynomial p(2);
      for (int m = 0; m < 6; ++m) p.add_term(exps[m], ac.c[i][k][m]);
      t.set(i, k, p);
    }
  }
  return t;
}

// ---------------------------------------------------------------------------
// Catalog

struct CatalogEntry {
  std::string name;
  std::string provenance;
  std::string description;
  bool has_parameter = false;
};

inline const std::vector<CatalogEntry>& catalog_entries() {
  static const std::vector<CatalogEntry> entries{
      {"choi", "Eq 1.6", "Choi (1975): quasiconvex, not polyconvex", false},
      {"choi_lam", "Eq 1.7 / Eq 4.31", "Choi-Lam extreme ray, single-shear layout", false},
      {"choi_lam_paired", "Eq 4.9", "paired-layout analogue of Choi-Lam: a_ii=1, a_ij=-1, b=c=d=1/2", false},
      {"convex_identity", "|xi|^2", "strictly convex reference form", false},
      {"serre", "Eq 1.5, parameter eps", "Serre's form minus eps |xi|^2", true},
  };
  return entries;
}

inline QuadraticForm serre_form(double eps) {
  QuadraticForm q;
  const auto square = [&q](std::initializer_list<std::pair<int, double>> terms) {
    Vec9 v = Vec9::Zero();
    for (auto [idx, w] : terms) v[idx] += w;
    q.add_square(v, 1.0);
  };
  square({{entry_index(0, 0), 1.0}, {entry_index(1, 2), -1.0}, {entry_index(2, 1), -1.0}});
  square({{entry_index(0, 1), 1.0}, {entry_index(2, 0), -1.0}, {entry_index(0, 2), 1.0}});
  square({{entry_index(1, 0), 1.0}, {entry_index(0, 2), -1.0}, {entry_index(2, 0), -1.0}});
  square({{entry_index(1, 1), 1.0}});
  square({{entry_index(2, 2), 1.0}});
  return QuadraticForm(q.gram() - eps * Gram::Identity());
}

/// Diagonal block shared by the Choi and Choi-Lam forms:
/// xi11^2 + xi22^2 + xi33^2 - 2(xi11 xi22 + xi22 xi33 + xi33 xi11).
inline Mat3 choi_diagonal_block() {
  Mat3 a;
  a << 1, -1, -1, -1, 1, -1, -1, -1, 1;
  return a;
}

inline QuadraticForm choi_form() { return form_from_single_shear(choi_diagonal_block(), 2, 2, 2); }

inline QuadraticForm choi_lam_form() {
  QuadraticForm q;
  for (int i = 0; i < 3; ++i) q.add_product(entry_index(i, i), entry_index(i, i), 1.0);
  q.add_product(entry_index(0, 0), entry_index(1, 1), -2.0);
  q.add_product(entry_index(1, 1), entry_index(2, 2), -2.0);
  q.add_product(entry_index(2, 2), entry_index(0, 0), -2.0);
  q.add_product(entry_index(0, 1), entry_index(0, 1), 1.0);
  q.add_product(entry_index(1, 2), entry_index(1, 2), 1.0);
  q.add_product(entry_index(2, 0), entry_index(2, 0), 1.0);
  return q;
}

inline ReducedOrthotropicForm choi_lam_paired_parameters() {
  ReducedOrthotropicForm r;
  r.a = choi_diagonal_block();
  r.b = r.c = r.d = 0.5;
  return r;
}

inline QuadraticForm convex_identity_form() { return QuadraticForm(Gram::Identity()); }

/// Looks up a catalog form; `eps` is only read by parameterized entries.
inline QuadraticForm catalog(std::string_view name, double eps = 0.0) {
  if (name == "serre") return serre_form(eps);
  if (name == "choi") return choi_form();
  if (name == "choi_lam") return choi_lam_form();
  if (name == "choi_lam_paired") return form_from_reduced(choi_lam_paired_parameters());
  if (name == "convex_identity") return convex_identity_form();
  throw Error(ErrorCode::kUnknownName, "unknown catalog form '" + std::string(name) + "'");
}

/// Reduced parameters for catalog entries that have the paired layout.
inline std::optional<ReducedOrthotropicForm> catalog_reduced(std::string_view name) {
  if (name == "choi_lam_paired") return choi_lam_paired_parameters();
  if (name == "convex_identity") {
    // |xi|^2 = sum xi_ii^2 + each off-diagonal pair, i.e. a=I, b=c=d=1.
    ReducedOrthotropicForm r;
    r.a = Mat3::Identity();
    r.b = r.c = r.d = 1.0;
    return r;
  }
  return std::nullopt;
}

}  // namespace quasicone
