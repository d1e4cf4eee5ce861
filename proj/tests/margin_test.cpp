#include <gtest/gtest.h>

#include "quasicone/margin.hpp"

namespace qc = quasicone;

namespace {

qc::CertifyConfig small_config() {
  qc::CertifyConfig cfg;
  cfg.grid_resolution = 48;
  return cfg;
}

qc::ReducedOrthotropicForm sample_reduced() {
  Eigen::Matrix<double, 9, 1> p;
  p << 1.5, 1.0, 2.0, -0.4, 0.3, -1.1, 0.6, 0.9, 0.4;
  return qc::ReducedOrthotropicForm::from_parameters(p);
}

}  // namespace

TEST(Margin, ConfigValidation) {
  qc::CertifyConfig cfg;
  cfg.grid_resolution = 4;
  EXPECT_THROW(cfg.validate(), qc::Error);
  cfg = {};
  cfg.tol = 0;
  EXPECT_THROW(cfg.validate(), qc::Error);
}

TEST(Margin, HemisphereGridIsUnitAndUpper) {
  const auto& g = qc::sphere_grid(16);
  ASSERT_EQ(g.points.size(), 256u);
  for (const auto& p : g.points) {
    EXPECT_NEAR(p.norm(), 1.0, 1e-14);
    EXPECT_GT(p[2], 0.0);
  }
}

TEST(Margin, CatalogValues) {
  const auto cfg = qc::CertifyConfig{};
  EXPECT_NEAR(qc::quasiconvexity_margin(qc::convex_identity_form(), cfg).margin, 1.0, 1e-9);
  const auto cl = qc::quasiconvexity_margin(qc::choi_lam_form(), cfg);
  EXPECT_NEAR(cl.margin, 0.0, 1e-8);
  EXPECT_NEAR(qc::quasiconvexity_margin(qc::choi_form(), cfg).margin, 0.0, 1e-8);
  EXPECT_GE(qc::quasiconvexity_margin(qc::serre_form(0.0), cfg).margin, -1e-9);
  // Minimizers include the AM-GM pair.
  const qc::Vec3 d = qc::Vec3(1, 1, 1).normalized();
  bool found = false;
  for (const auto& m : cl.minimizers) found = found || (qc::line_angle(m.x, d) < 1e-6 && qc::line_angle(m.y, d) < 1e-6);
  EXPECT_TRUE(found);
  for (const auto& m : cl.minimizers) EXPECT_LE(std::abs(qc::biquadratic_eval(qc::choi_lam_form(), m.x, m.y) - cl.margin), 1e-8);
}

TEST(Margin, NegativeEpsilonSerreIsNotQuasiconvexBeyondEps) {
  // Serre at eps subtracts eps |xi|^2, so the margin drops by exactly eps.
  const auto cfg = small_config();
  const double m0 = qc::quasiconvexity_margin(qc::serre_form(0.0), cfg).margin;
  const double m1 = qc::quasiconvexity_margin(qc::serre_form(0.2), cfg).margin;
  EXPECT_NEAR(m0 - m1, 0.2, 1e-9);
}

TEST(Margin, ScalingEquivariance) {
  const auto cfg = small_config();
  const auto q = qc::form_from_reduced(sample_reduced());
  const double m = qc::quasiconvexity_margin(q, cfg).margin;
  EXPECT_NEAR(qc::quasiconvexity_margin(3.5 * q, cfg).margin, 3.5 * m, 1e-10 * (1 + std::abs(m)));
}

TEST(Margin, OrthotropicSymmetries) {
  const auto cfg = small_config();
  const auto r = sample_reduced();
  const double m = qc::quasiconvexity_margin(qc::form_from_reduced(r), cfg).margin;
  // Swap coordinates 1 and 2: a -> P a P, the (1,3) and (2,3) shears swap.
  Eigen::Matrix3d p;
  p << 0, 1, 0, 1, 0, 0, 0, 0, 1;
  qc::ReducedOrthotropicForm s = r;
  s.a = p * r.a * p;
  std::swap(s.c, s.d);
  EXPECT_NEAR(qc::quasiconvexity_margin(qc::form_from_reduced(s), cfg).margin, m, 1e-9);
  // Reflections y_i -> -y_i leave T(y) similar, checked pointwise.
  const auto t = qc::acoustic_matrix(qc::form_from_reduced(r));
  const qc::Vec3 y(0.2, -0.7, 0.5);
  for (int i = 0; i < 3; ++i) {
    qc::Vec3 f = y;
    f[i] = -f[i];
    Eigen::SelfAdjointEigenSolver<qc::Mat3> a(t.evaluate(y)), b(t.evaluate(f));
    EXPECT_TRUE(a.eigenvalues().isApprox(b.eigenvalues(), 1e-12));
  }
}

TEST(Margin, MonotoneUnderQuasiconvexAddition) {
  const auto cfg = small_config();
  const auto q1 = qc::choi_form();
  const auto q2 = q1 + 0.3 * qc::choi_lam_form();
  EXPECT_GE(qc::quasiconvexity_margin(q2, cfg).margin, qc::quasiconvexity_margin(q1, cfg).margin - 1e-12);
}

TEST(Margin, FastMarginAgreesOnCatalog) {
  const auto cfg = small_config();
  EXPECT_NEAR(qc::fast_margin(qc::choi_lam_form(), cfg), 0.0, 1e-12);
  EXPECT_NEAR(qc::fast_margin(qc::serre_form(0.1), cfg), qc::quasiconvexity_margin(qc::serre_form(0.1), cfg).margin, 1e-10);
}

TEST(RankOneZeros, Catalog) {
  const auto cfg = small_config();
  EXPECT_TRUE(qc::rank_one_zeros(qc::convex_identity_form(), cfg).empty());
  const auto zs = qc::rank_one_zeros(qc::choi_lam_form(), cfg);
  // (1,+-1,+-1)/sqrt3 on both sides plus e1(x)e3, e2(x)e1, e3(x)e2.
  EXPECT_EQ(zs.size(), 7u);
  const qc::Vec3 d = qc::Vec3(1, 1, 1).normalized();
  bool found = false;
  for (const auto& z : zs) {
    found = found || (qc::line_angle(z.y, d) < 1e-6);
    EXPECT_GT(qc::canonical_sign(z.y).dot(z.y), 0.0);
  }
  EXPECT_TRUE(found);
  // Serre at eps = 0 is strictly positive on rank-one matrices (independent
  // multistart BFGS minimum 0.0382578), so it has no zeros.
  EXPECT_TRUE(qc::rank_one_zeros(qc::serre_form(0.0), cfg).empty());
  EXPECT_NEAR(qc::quasiconvexity_margin(qc::serre_form(0.0), cfg).margin, 0.0382578493, 1e-9);
  EXPECT_THROW(qc::rank_one_zeros(qc::serre_form(1.0), cfg), qc::Error);
}

TEST(Margin, ReportIsDeterministicAcrossWorkerCounts) {
  const auto cfg = small_config();
  setenv("QUASICONE_THREADS", "1", 1);
  const nlohmann::json a = qc::quasiconvexity_margin(qc::choi_lam_form(), cfg);
  setenv("QUASICONE_THREADS", "4", 1);
  const nlohmann::json b = qc::quasiconvexity_margin(qc::choi_lam_form(), cfg);
  unsetenv("QUASICONE_THREADS");
  EXPECT_EQ(a.dump(), b.dump());
}
