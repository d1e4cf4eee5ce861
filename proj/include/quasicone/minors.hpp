#pragma once

// Minor-cofactor sums of a symmetric pair (A, B), the pencil det(A - tB),
// its roots, and the normalized-sum inequality chain.
//
// Convention: S_m sums over ALL m x m minors B[I,J] (not only principal ones)
// times the signed complementary minor (-1)^(sum I + sum J) det A[I^c, J^c].
// With it det(A - tB) = sum_m (-1)^m S_m t^m holds for any square pair;
// S_0 = det A and S_n = det B.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "quasicone/error.hpp"
#include "quasicone/parallel.hpp"
#include "quasicone/polynomial.hpp"

namespace quasicone {

inline constexpr int kMaxPairDimension = 8;

class SymmetricMatrixPair {
 public:
  SymmetricMatrixPair(Eigen::MatrixXd a, Eigen::MatrixXd b) : a_(std::move(a)), b_(std::move(b)) {
    const auto n = a_.rows();
    if (n < 2 || n > kMaxPairDimension) {
      throw Error(ErrorCode::kInvalidArgument, "pair dimension must be in [2, 8], got " + std::to_string(n));
    }
    if (a_.cols() != n || b_.rows() != n || b_.cols() != n) {
      throw Error(ErrorCode::kInvalidArgument, "A and B must be square of the same size");
    }
    check_symmetric(a_, "A");
    check_symmetric(b_, "B");
  }

  int n() const { return static_cast<int>(a_.rows()); }
  const Eigen::MatrixXd& a() const { return a_; }
  const Eigen::MatrixXd& b() const { return b_; }

  SymmetricMatrixPair shifted(double eps) const {
    const auto id = Eigen::MatrixXd::Identity(n(), n());
    return {a_ + eps * id, b_ + eps * id};
  }

 private:
  static void check_symmetric(const Eigen::MatrixXd& m, const char* name) {
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
      throw Error(ErrorCode::kInvalidArgument, std::string(name) + " is not symmetric");
    }
  }

  Eigen::MatrixXd a_, b_;
};

inline double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

namespace detail {

inline std::vector<int> indices_of(std::uint32_t mask) {
  std::vector<int> out;
  for (int i = 0; mask; ++i, mask >>= 1)
    if (mask & 1u) out.push_back(i);
  return out;
}

inline double sub_determinant(const Eigen::MatrixXd& m, const std::vector<int>& rows, const std::vector<int>& cols) {
  if (rows.empty()) return 1.0;
  Eigen::MatrixXd s(rows.size(), cols.size());
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < cols.size(); ++c) s(r, c) = m(rows[r], cols[c]);
  return s.determinant();
}

inline std::vector<std::uint32_t> masks_of_size(int n, int m) {
  std::vector<std::uint32_t> out;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask)
    if (std::popcount(mask) == m) out.push_back(mask);
  return out;
}

}  // namespace detail

inline double minor_sum(const SymmetricMatrixPair& pair, int m) {
  const int n = pair.n();
  if (m < 0 || m > n) {
    throw Error(ErrorCode::kInvalidArgument, "minor order " + std::to_string(m) + " outside [0, " + std::to_string(n) + "]");
  }
  const std::uint32_t full = (1u << n) - 1u;
  const auto masks = detail::masks_of_size(n, m);
  double sum = 0.0;
  for (std::uint32_t rows : masks) {
    const auto ri = detail::indices_of(rows);
    const auto rc = detail::indices_of(full & ~rows);
    int row_sign = 0;
    for (int i : ri) row_sign += i;
    for (std::uint32_t cols : masks) {
      const auto ci = detail::indices_of(cols);
      const auto cc = detail::indices_of(full & ~cols);
      int sign = row_sign;
      for (int j : ci) sign += j;
      const double bm = detail::sub_determinant(pair.b(), ri, ci);
      if (bm == 0.0) continue;
      const double cof = detail::sub_determinant(pair.a(), rc, cc);
      sum += (sign % 2 ? -1.0 : 1.0) * bm * cof;
    }
  }
  return sum;
}

inline std::vector<double> minor_sums(const SymmetricMatrixPair& pair) {
  std::vector<double> s(static_cast<std::size_t>(pair.n()) + 1);
  for (int m = 0; m <= pair.n(); ++m) s[m] = minor_sum(pair, m);
  return s;
}

/// Coefficients of det(A - tB), by interpolation at n+1 points of [0, 2].
inline InterpolationResult pencil_poly(const SymmetricMatrixPair& pair) {
  std::vector<Sample> samples;
  for (double t : default_abscissae(pair.n())) samples.push_back({t, (pair.a() - t * pair.b()).determinant()});
  return univariate_from_samples(samples, pair.n());
}

inline double min_symmetric_eigenvalue(const Eigen::MatrixXd& m) {
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m, Eigen::EigenvaluesOnly).eigenvalues()[0];
}

/// Roots of det(A - tB): eigenvalues of B^{-1/2} A B^{-1/2}, ascending.
inline std::vector<double> pencil_roots(const SymmetricMatrixPair& pair) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eb(pair.b());
  const double bmin = eb.eigenvalues()[0];
  const double bscale = std::max(1.0, eb.eigenvalues().cwiseAbs().maxCoeff());
  if (bmin <= 1e-12 * bscale) {
    throw Error(ErrorCode::kPrecondition,
                "B is singular (min eigenvalue " + std::to_string(bmin) +
                    "); shift both matrices by eps*I (A+eps I, B+eps I) and retry");
  }
  const Eigen::MatrixXd inv_sqrt =
      eb.eigenvectors() * eb.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() * eb.eigenvectors().transpose();
  Eigen::MatrixXd c = inv_sqrt * pair.a() * inv_sqrt;
  c = 0.5 * (c + c.transpose());
  const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(c, Eigen::EigenvaluesOnly).eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

/// e_k(values) for k = 0..size.
inline std::vector<double> elementary_symmetric(const std::vector<double>& values) {
  std::vector<double> e(values.size() + 1, 0.0);
  e[0] = 1.0;
  for (double v : values)
    for (std::size_t k = e.size() - 1; k >= 1; --k) e[k] += v * e[k - 1];
  return e;
}

struct Lemma41Report {
  int n = 0;
  std::vector<double> sums;        ///< S_0..S_n
  std::vector<double> normalized;  ///< S_m / C(n, m)
  double min_slack = 0.0;          ///< min over 1 <= k < m <= n of S_k/C(n,k) - S_m/C(n,m)
  double scale = 0.0;              ///< max |S_m / C(n,m)|, m >= 1
  bool passed = false;
  double expansion_residual = 0.0;  ///< interpolated pencil vs (-1)^m S_m
  std::optional<double> vieta_residual;
  std::optional<double> min_root;
};

inline constexpr double kPsdTolerance = 1e-10;
inline constexpr double kSlackTolerance = 1e-9;

inline Lemma41Report lemma41_check(const SymmetricMatrixPair& pair) {
  const int n = pair.n();
  const double bnorm = std::max(1.0, pair.b().norm());
  if (min_symmetric_eigenvalue(pair.b()) < -kPsdTolerance * bnorm) {
    throw Error(ErrorCode::kPrecondition, "hypothesis B >= 0 violated");
  }
  const Eigen::MatrixXd diff = pair.a() - pair.b();
  if (min_symmetric_eigenvalue(diff) < -kPsdTolerance * std::max(1.0, diff.norm())) {
    throw Error(ErrorCode::kPrecondition, "hypothesis A >= B violated");
  }

  Lemma41Report rep;
  rep.n = n;
  rep.sums = minor_sums(pair);
  for (int m = 0; m <= n; ++m) rep.normalized.push_back(rep.sums[m] / binomial(n, m));
  for (int m = 1; m <= n; ++m) rep.scale = std::max(rep.scale, std::abs(rep.normalized[m]));
  rep.min_slack = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= n; ++k)
    for (int m = k + 1; m <= n; ++m) rep.min_slack = std::min(rep.min_slack, rep.normalized[k] - rep.normalized[m]);
  rep.passed = rep.min_slack >= -kSlackTolerance * std::max(1.0, rep.scale);

  const auto poly = pencil_poly(pair);
  double cmax = 0.0, dmax = 0.0;
  for (int m = 0; m <= n; ++m) {
    const double expected = (m % 2 ? -1.0 : 1.0) * rep.sums[m];
    cmax = std::max(cmax, std::abs(expected));
    dmax = std::max(dmax, std::abs(poly.raw_coefficients[m] - expected));
  }
  rep.expansion_residual = cmax > 0 ? dmax / cmax : dmax;

  const double bmin = min_symmetric_eigenvalue(pair.b());
  if (bmin > 1e-12 * bnorm) {
    const auto roots = pencil_roots(pair);
    rep.min_root = roots.front();
    const auto e = elementary_symmetric(roots);
    const double det_b = pair.b().determinant();
    double smax = 0.0, vmax = 0.0;
    for (int m = 0; m <= n; ++m) {
      smax = std::max(smax, std::abs(rep.sums[m]));
      vmax = std::max(vmax, std::abs(rep.sums[m] - det_b * e[n - m]));
    }
    rep.vieta_residual = smax > 0 ? vmax / smax : vmax;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Seeded campaigns

/// SplitMix64 finalizer; derives independent per-trial seeds.
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// B = G^T G, A = B + H^T H with Gaussian G, H.
inline SymmetricMatrixPair random_lemma_pair(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Eigen::MatrixXd gm(n, n), hm(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) gm(i, j) = g(rng);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) hm(i, j) = g(rng);
  Eigen::MatrixXd b = gm.transpose() * gm;
  Eigen::MatrixXd a = b + hm.transpose() * hm;
  b = 0.5 * (b + b.transpose());
  a = 0.5 * (a + a.transpose());
  return {a, b};
}

struct CampaignFailure {
  int trial;
  std::string reason;
  double slack;
};

struct CampaignResult {
  int n = 0;
  int trials = 0;
  std::uint64_t seed = 0;
  double eps = 0.0;
  double min_slack = std::numeric_limits<double>::infinity();
  double min_relative_slack = std::numeric_limits<double>::infinity();
  double max_expansion_residual = 0.0;
  double max_vieta_residual = 0.0;
  int vieta_checked = 0;
  std::optional<double> min_root;  ///< over trials with min eig(B) > 1e-6
  std::vector<CampaignFailure> failures;
};

inline CampaignResult run_lemma_campaign(int n, int trials, std::uint64_t seed, double eps = 0.0) {
  if (n < 2 || n > kMaxPairDimension) throw Error(ErrorCode::kInvalidArgument, "--n must be in [2, 8]");
  if (trials < 0) throw Error(ErrorCode::kInvalidArgument, "--trials must be non-negative");
  std::vector<std::optional<Lemma41Report>> reports(trials);
  std::vector<std::string> errors(trials);
  std::vector<double> bmins(trials);
  parallel_for(static_cast<std::size_t>(trials), [&](std::size_t i) {
    auto pair = random_lemma_pair(n, mix_seed(seed ^ mix_seed(i)));
    if (eps != 0.0) pair = pair.shifted(eps);
    bmins[i] = min_symmetric_eigenvalue(pair.b());
    try {
      reports[i] = lemma41_check(pair);
    } catch (const Error& e) {
      errors[i] = e.what();
    }
  });

  CampaignResult out;
  out.n = n;
  out.trials = trials;
  out.seed = seed;
  out.eps = eps;
  for (int i = 0; i < trials; ++i) {
    if (!reports[i]) {
      out.failures.push_back({i, errors[i], 0.0});
      continue;
    }
    const auto& r = *reports[i];
    out.min_slack = std::min(out.min_slack, r.min_slack);
    out.min_relative_slack = std::min(out.min_relative_slack, r.min_slack / std::max(1.0, r.scale));
    out.max_expansion_residual = std::max(out.max_expansion_residual, r.expansion_residual);
    if (r.vieta_residual) {
      out.max_vieta_residual = std::max(out.max_vieta_residual, *r.vieta_residual);
      ++out.vieta_checked;
    }
    if (r.min_root && bmins[i] > 1e-6) out.min_root = std::min(out.min_root.value_or(*r.min_root), *r.min_root);
    if (!r.passed) out.failures.push_back({i, "inequality chain violated", r.min_slack});
  }
  return out;
}

inline void to_json(nlohmann::json& j, const CampaignResult& r) {
  nlohmann::json failures = nlohmann::json::array();
  for (const auto& f : r.failures) failures.push_back({{"trial", f.trial}, {"reason", f.reason}, {"slack", f.slack}});
  j = {{"schema", "quasicone/1"},
       {"n", r.n},
       {"trials", r.trials},
       {"seed", r.seed},
       {"eps", r.eps},
       {"min_slack", r.trials ? nlohmann::json(r.min_slack) : nlohmann::json()},
       {"min_relative_slack", r.trials ? nlohmann::json(r.min_relative_slack) : nlohmann::json()},
       {"max_expansion_residual", r.max_expansion_residual},
       {"max_vieta_residual", r.max_vieta_residual},
       {"vieta_checked", r.vieta_checked},
       {"min_root", r.min_root ? nlohmann::json(*r.min_root) : nlohmann::json()},
       {"failure_count", r.failures.size()},
       {"failures", failures}};
}

}  // namespace quasicone
