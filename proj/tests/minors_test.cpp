#include <gtest/gtest.h>

#include "quasicone/minors.hpp"

namespace qc = quasicone;

TEST(Minors, ExpansionEndpoints) {
  const auto pair = qc::random_lemma_pair(4, 9);
  const auto sums = qc::minor_sums(pair);
  EXPECT_NEAR(sums.front(), pair.a().determinant(), 1e-10 * std::abs(pair.a().determinant()));
  EXPECT_NEAR(sums.back(), pair.b().determinant(), 1e-10 * std::abs(pair.b().determinant()));
}

TEST(Minors, DiagonalPairHasBinomialSums) {
  // A = 2I, B = I: det(2I - tI) = (2 - t)^n, so S_m = C(n,m) 2^{n-m}.
  const int n = 5;
  const qc::SymmetricMatrixPair pair(2 * Eigen::MatrixXd::Identity(n, n), Eigen::MatrixXd::Identity(n, n));
  for (int m = 0; m <= n; ++m) EXPECT_NEAR(qc::minor_sum(pair, m), qc::binomial(n, m) * std::pow(2.0, n - m), 1e-9);
}

TEST(Minors, PencilPolyMatchesSignedSums) {
  const auto pair = qc::random_lemma_pair(5, 21);
  const auto sums = qc::minor_sums(pair);
  const auto poly = qc::pencil_poly(pair);
  for (int m = 0; m <= 5; ++m) {
    EXPECT_NEAR(poly.raw_coefficients[m], (m % 2 ? -1 : 1) * sums[m], 1e-9 * (1 + std::abs(sums[m])));
  }
}

TEST(Lemma, IdentityPairPasses) {
  const qc::SymmetricMatrixPair pair(Eigen::MatrixXd::Identity(3, 3), Eigen::MatrixXd::Identity(3, 3));
  const auto rep = qc::lemma41_check(pair);
  EXPECT_TRUE(rep.passed);
  ASSERT_TRUE(rep.min_root.has_value());
  EXPECT_NEAR(*rep.min_root, 1.0, 1e-12);
}

TEST(Lemma, HypothesisViolationsAreNamed) {
  Eigen::MatrixXd b = Eigen::MatrixXd::Identity(3, 3);
  b(2, 2) = -1;
  try {
    qc::lemma41_check(qc::SymmetricMatrixPair(Eigen::MatrixXd::Identity(3, 3) * 3, b));
    FAIL();
  } catch (const qc::Error& e) {
    EXPECT_NE(std::string(e.what()).find("B >= 0"), std::string::npos);
  }
  try {
    qc::lemma41_check(qc::SymmetricMatrixPair(Eigen::MatrixXd::Identity(3, 3), 2 * Eigen::MatrixXd::Identity(3, 3)));
    FAIL();
  } catch (const qc::Error& e) {
    EXPECT_NE(std::string(e.what()).find("A >= B"), std::string::npos);
  }
}

TEST(Lemma, SingularBRootsNeedShift) {
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(3, 3);
  b(0, 0) = 1;
  EXPECT_THROW(qc::pencil_roots(qc::SymmetricMatrixPair(Eigen::MatrixXd::Identity(3, 3) * 2, b)), qc::Error);
}

TEST(Lemma, CampaignHasNoFailures) {
  for (int n = 2; n <= 6; ++n) {
    const auto r = qc::run_lemma_campaign(n, 100, 1234);
    EXPECT_TRUE(r.failures.empty()) << n;
    EXPECT_LE(r.max_expansion_residual, 1e-9) << n;
    ASSERT_TRUE(r.min_root.has_value());
    EXPECT_GE(*r.min_root, 1 - 1e-9);
  }
}

TEST(Lemma, ShiftChangesSlackByOrderEps) {
  const auto a = qc::run_lemma_campaign(4, 50, 77, 1e-4);
  const auto b = qc::run_lemma_campaign(4, 50, 77, 1e-6);
  EXPECT_LT(std::abs(a.min_slack - b.min_slack), 1e-2);
  EXPECT_THROW(qc::SymmetricMatrixPair(Eigen::MatrixXd::Identity(9, 9), Eigen::MatrixXd::Identity(9, 9)), qc::Error);
}

TEST(Lemma, CampaignIsDeterministic) {
  const nlohmann::json a = qc::run_lemma_campaign(5, 40, 99);
  const nlohmann::json b = qc::run_lemma_campaign(5, 40, 99);
  EXPECT_EQ(a.dump(), b.dump());
}
