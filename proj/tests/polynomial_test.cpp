#include <gtest/gtest.h>

#include "quasicone/polynomial.hpp"

namespace qc = quasicone;

namespace {

qc::HomogeneousPolynomial choi_lam_sextic() {
  qc::HomogeneousPolynomial p(6);
  p.add_term({4, 0, 2}, 1);
  p.add_term({2, 4, 0}, 1);
  p.add_term({0, 2, 4}, 1);
  p.add_term({2, 2, 2}, -3);
  return p;
}

}  // namespace

TEST(Polynomial, MonomialCountsMatchStarsAndBars) {
  EXPECT_EQ(qc::monomials_of_degree(2).size(), 6u);
  EXPECT_EQ(qc::monomials_of_degree(3).size(), 10u);
  EXPECT_EQ(qc::monomials_of_degree(6).size(), 28u);
  EXPECT_EQ(qc::monomials_of_degree(6).front(), (qc::Exponent{6, 0, 0}));
}

TEST(Polynomial, RejectsWrongDegreeTerm) {
  qc::HomogeneousPolynomial p(2);
  EXPECT_THROW(p.add_term({1, 0, 0}, 1.0), qc::Error);
}

TEST(Polynomial, EvalAtAmGmPointIsZero) {
  const auto p = choi_lam_sextic();
  EXPECT_NEAR(qc::poly_eval(p, qc::Vec3(1, 1, 1)), 0.0, 1e-15);
  EXPECT_NEAR(qc::poly_eval(p, qc::Vec3(1, -1, 1)), 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(qc::poly_eval(p, qc::Vec3(1, 2, 0)), 16.0);
}

TEST(Polynomial, CombineCancelsAndPrunes) {
  const auto p = choi_lam_sextic();
  const auto z = qc::poly_combine(p, p, 1.0, -1.0);
  EXPECT_TRUE(z.is_zero());
  EXPECT_THROW(qc::poly_combine(p, qc::HomogeneousPolynomial(2), 1, 1), qc::Error);
}

TEST(Polynomial, MultiplicationOfSquares) {
  qc::HomogeneousPolynomial s(2);
  s.add_term({2, 0, 0}, 1);
  s.add_term({0, 2, 0}, 1);
  s.add_term({0, 0, 2}, 1);
  const auto cube = qc::poly_mul(qc::poly_mul(s, s), s);
  EXPECT_EQ(cube.degree(), 6);
  EXPECT_DOUBLE_EQ(cube.coefficient({2, 2, 2}), 6.0);
  EXPECT_DOUBLE_EQ(cube.coefficient({4, 2, 0}), 3.0);
  EXPECT_DOUBLE_EQ(cube.coefficient({6, 0, 0}), 1.0);
}

TEST(Polynomial, JsonRoundTrip) {
  const auto p = choi_lam_sextic();
  const nlohmann::json j = p;
  EXPECT_EQ(j.at("degree"), 6);
  EXPECT_EQ(j.at("terms").size(), 4u);
  EXPECT_EQ(j.get<qc::HomogeneousPolynomial>(), p);
}

TEST(Polynomial, FormatsInRequestedOrder) {
  const auto p = choi_lam_sextic();
  EXPECT_EQ(qc::format_polynomial(p), "y1^4*y3^2 + y1^2*y2^4 - 3*y1^2*y2^2*y3^2 + y2^2*y3^4");
  const std::array<qc::Exponent, 2> order{{{2, 2, 2}, {0, 2, 4}}};
  EXPECT_EQ(qc::format_polynomial(p, order), "-3*y1^2*y2^2*y3^2 + y2^2*y3^4 + y1^4*y3^2 + y1^2*y2^4");
}

TEST(Univariate, InterpolatesCubicExactly) {
  // 2 - 3t + 0.5t^2 + t^3
  std::vector<qc::Sample> s;
  for (double t : qc::default_abscissae(3)) s.push_back({t, 2 - 3 * t + 0.5 * t * t + t * t * t});
  const auto r = qc::univariate_from_samples(s, 3);
  ASSERT_EQ(r.raw_coefficients.size(), 4u);
  EXPECT_NEAR(r.raw_coefficients[0], 2.0, 1e-12);
  EXPECT_NEAR(r.raw_coefficients[1], -3.0, 1e-12);
  EXPECT_NEAR(r.raw_coefficients[2], 0.5, 1e-12);
  EXPECT_NEAR(r.raw_coefficients[3], 1.0, 1e-12);
  EXPECT_LT(r.residual, 1e-13);
}

TEST(Univariate, TooFewAbscissaeThrows) {
  const std::vector<qc::Sample> s{{0.0, 1.0}, {0.0, 2.0}, {1.0, 3.0}};
  EXPECT_THROW(qc::univariate_from_samples(s, 2), qc::Error);
}
