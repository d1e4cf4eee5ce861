#include <random>

#include <gtest/gtest.h>

#include "quasicone/determinant.hpp"

namespace qc = quasicone;

namespace {

qc::ReducedOrthotropicForm random_reduced(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> entry(-2, 2), shear(1e-3, 2);
  Eigen::Matrix<double, 9, 1> p;
  for (int k = 0; k < 6; ++k) p[k] = entry(rng);
  for (int k = 6; k < 9; ++k) p[k] = shear(rng);
  return qc::ReducedOrthotropicForm::from_parameters(p);
}

}  // namespace

TEST(Determinant, ChoiLamSextic) {
  const auto det = qc::acoustic_det(qc::acoustic_matrix(qc::choi_lam_form()));
  qc::HomogeneousPolynomial expected(6);
  expected.add_term({4, 0, 2}, 1);
  expected.add_term({2, 4, 0}, 1);
  expected.add_term({0, 2, 4}, 1);
  expected.add_term({2, 2, 2}, -3);
  EXPECT_LE(qc::poly_max_difference(det, expected), 1e-12);
  EXPECT_FALSE(qc::perfect_square_test(det).is_square);
}

TEST(Determinant, IdentityClosedFormCoefficients) {
  const auto r = *qc::catalog_reduced("convex_identity");
  const auto closed = qc::reduced_det_closed_form(r);
  const std::array<double, 10> expected{1, 1, 1, 3, 3, 3, 3, 3, 3, 6};
  const auto& mons = qc::closed_form_monomials();
  for (int k = 0; k < 10; ++k) EXPECT_DOUBLE_EQ(closed.coefficient(mons[k]), expected[k]) << k;
  // (|y|^2)^3 is not the square of any cubic.
  EXPECT_FALSE(qc::perfect_square_test(closed).is_square);
}

TEST(Determinant, PairedChoiLamAnalogue) {
  // Symbolic oracle: (2 sum y_i^6 + 3 sum y_i^4 y_j^2 - 24 y1^2 y2^2 y3^2) / 8.
  const auto det = qc::acoustic_det(qc::acoustic_matrix(qc::catalog("choi_lam_paired")));
  EXPECT_NEAR(det.coefficient({6, 0, 0}), 0.25, 1e-14);
  EXPECT_NEAR(det.coefficient({0, 4, 2}), 0.375, 1e-14);
  EXPECT_NEAR(det.coefficient({2, 2, 2}), -3.0, 1e-14);
}

TEST(Determinant, ClosedFormMatchesCofactorExpansion) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const auto r = random_reduced(rng);
    const auto det = qc::acoustic_det(qc::acoustic_matrix(qc::form_from_reduced(r)));
    EXPECT_TRUE(qc::poly_equal_within(det, qc::reduced_det_closed_form(r), 1e-12)) << trial;
  }
}

TEST(Determinant, DetIsInvariantUnderMinorShift) {
  const auto q = qc::choi_form();
  const auto shifted = qc::add_null_lagrangian(q, {1, -2, 0.5, 0, 0, 3, 0, 1, 1});
  EXPECT_LE(qc::poly_max_difference(qc::acoustic_det(qc::acoustic_matrix(q)),
                                    qc::acoustic_det(qc::acoustic_matrix(shifted))),
            1e-12);
}

TEST(Determinant, ZeroFormGivesZeroPolynomial) {
  EXPECT_TRUE(qc::acoustic_det(qc::acoustic_matrix(qc::QuadraticForm::zero())).is_zero());
}

TEST(PerfectSquare, RecoversCubicRoot) {
  qc::HomogeneousPolynomial s(3);
  s.add_term({3, 0, 0}, 1);
  s.add_term({1, 1, 1}, -2);
  s.add_term({0, 1, 2}, 0.5);
  const auto r = qc::perfect_square_test(qc::poly_mul(s, s));
  ASSERT_TRUE(r.is_square);
  ASSERT_TRUE(r.root.has_value());
  EXPECT_TRUE(qc::poly_equal_within(*r.root, s, 1e-8) || qc::poly_equal_within(*r.root, qc::poly_scale(s, -1), 1e-8));
}

TEST(PerfectSquare, SingleMonomialSquare) {
  EXPECT_TRUE(qc::perfect_square_test(qc::HomogeneousPolynomial::monomial({6, 0, 0}, 1.0)).is_square);
  EXPECT_FALSE(qc::perfect_square_test(qc::HomogeneousPolynomial::monomial({5, 1, 0}, 1.0)).is_square);
  EXPECT_THROW(qc::perfect_square_test(qc::HomogeneousPolynomial(4)), qc::Error);
}

TEST(Pencil, HalfScalingGivesBinomialCubic) {
  const auto q = qc::choi_lam_form();
  const auto rep = qc::pencil_identity_check(q, 0.5 * q);
  ASSERT_TRUE(rep.proportional);
  EXPECT_NEAR(*rep.constant, 1.0, 1e-12);
  EXPECT_NEAR(*rep.gamma, 1.5, 1e-9);
  EXPECT_NEAR(*rep.beta, 0.75, 1e-9);
  EXPECT_NEAR(*rep.alpha, 0.125, 1e-9);
}

TEST(Pencil, NonProportionalSplitIsFlagged) {
  const auto q = qc::convex_identity_form();
  qc::QuadraticForm q1;
  q1.add_product(0, 0, 1.0);
  EXPECT_FALSE(qc::pencil_identity_check(q, q1).proportional);
  EXPECT_THROW(qc::pencil_identity_check(qc::QuadraticForm::zero(), q1), qc::Error);
}

TEST(DetReport, ClosedFormResidualOnlyForReduced) {
  const auto rep = qc::analyze_determinant(qc::choi_lam_form(), std::nullopt);
  EXPECT_FALSE(rep.closed_form_residual.has_value());
  const auto r = *qc::catalog_reduced("choi_lam_paired");
  const auto rep2 = qc::analyze_determinant(qc::form_from_reduced(r), r);
  ASSERT_TRUE(rep2.closed_form_residual.has_value());
  EXPECT_LT(*rep2.closed_form_residual, 1e-14);
}
