#include <gtest/gtest.h>

#include "quasicone/report.hpp"

namespace qc = quasicone;
using nlohmann::json;

TEST(FormParsing, CatalogNameWithParameter) {
  const auto f = qc::load_form("serre(0.1)");
  EXPECT_EQ(f.echo.at("name"), "serre");
  EXPECT_DOUBLE_EQ(f.echo.at("eps").get<double>(), 0.1);
  EXPECT_TRUE(f.form.gram().isApprox(qc::serre_form(0.1).gram()));
  EXPECT_DOUBLE_EQ(qc::load_form("serre", 0.25).echo.at("eps").get<double>(), 0.25);
}

TEST(FormParsing, GramRoundTripsThroughEcho) {
  const auto q = qc::choi_form();
  const auto f = qc::parse_form(qc::load_form("choi").echo);
  EXPECT_TRUE(f.form.gram().isApprox(q.gram()));
  json j = {{"kind", "gram"}, {"entries", qc::detail::gram_upper(q.gram())}};
  const auto g = qc::parse_form(j);
  EXPECT_EQ(g.form.gram(), q.gram());
  EXPECT_EQ(qc::parse_form(g.echo).form.gram(), q.gram());
}

TEST(FormParsing, VoigtAndReducedCarryClosedFormParameters) {
  json v = {{"kind", "voigt"}, {"c11", 2}, {"c22", 3}, {"c33", 4}, {"c12", 0.5},
            {"c13", -0.2}, {"c23", 0.1}, {"c44", 1}, {"c55", 1.5}, {"c66", 0.7}};
  const auto f = qc::parse_form(v);
  ASSERT_TRUE(f.reduced.has_value());
  EXPECT_DOUBLE_EQ(f.reduced->a(0, 1), 0.5 + 0.7);
  json r = {{"kind", "reduced"}, {"a", {{1, -1, -1}, {-1, 1, -1}, {-1, -1, 1}}}, {"b", 1}, {"c", 1}, {"d", 1},
            {"layout", "single_shear"}};
  const auto s = qc::parse_form(r);
  EXPECT_FALSE(s.reduced.has_value());
  EXPECT_EQ(s.form.gram(), qc::choi_lam_form().gram());
}

TEST(FormParsing, ErrorsNameTheField) {
  const auto message = [](const json& j) {
    try {
      qc::parse_form(j);
    } catch (const qc::Error& e) {
      EXPECT_EQ(e.code(), qc::ErrorCode::kParse);
      return std::string(e.what());
    }
    return std::string();
  };
  EXPECT_NE(message({{"kind", "voigt"}, {"c11", 1}}).find("'c22'"), std::string::npos);
  EXPECT_NE(message({{"kind", "gram"}, {"entries", {1, 2}}}).find("45"), std::string::npos);
  EXPECT_NE(message({{"kind", "reduced"}, {"a", {{1, 2, 3}, {0, 1, 0}, {3, 0, 1}}}, {"b", 1}, {"c", 1}, {"d", 1}})
                .find("symmetric"),
            std::string::npos);
  EXPECT_NE(message({{"kind", "tensor"}}).find("unknown kind"), std::string::npos);
  EXPECT_THROW(qc::load_form("not_a_form"), qc::Error);
}

TEST(FormParsing, SyntaxErrorReportsLine) {
  try {
    qc::parse_json_text("{\n  \"kind\": \"gram\",\n  oops\n}", "f.json");
    FAIL();
  } catch (const qc::Error& e) {
    EXPECT_EQ(std::string(e.what()).rfind("f.json:3:", 0), 0u) << e.what();
  }
}

TEST(Analyze, ReportShape) {
  qc::CertifyConfig cfg;
  cfg.grid_resolution = 24;
  cfg.probe_directions = 4;
  const json rep = qc::analyze(qc::load_form("convex_identity"), cfg);
  EXPECT_EQ(rep.at("schema"), "quasicone/1");
  EXPECT_NEAR(rep.at("margin_report").at("margin").get<double>(), 1.0, 1e-9);
  for (const char* k : {"milton", "extreme_point", "extremal_polynomial", "polyconvexity"}) {
    EXPECT_TRUE(rep.at("probes").contains(k)) << k;
  }
  EXPECT_EQ(rep.at("probes").at("polyconvexity").at("verdict"), "polyconvex");
  EXPECT_EQ(rep.at("config").at("probe_directions"), 4);
  // Probe preconditions surface as structured entries.
  const json serre = qc::analyze(qc::load_form("serre(1.0)"), cfg);
  EXPECT_EQ(serre.at("probes").at("milton").at("error").at("code"), "precondition_failed");
}
