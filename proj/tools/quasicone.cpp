// quasicone: analyze quasiconvex quadratic forms on 3x3 matrices.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "quasicone/determinant.hpp"
#include "quasicone/forms.hpp"
#include "quasicone/minors.hpp"
#include "quasicone/report.hpp"

namespace {

using quasicone::Error;
using quasicone::ErrorCode;
using nlohmann::json;

struct Globals {
  std::uint64_t seed = 42;
  double tol = 1e-9;
  int grid = 96;
  bool pretty = false;
  std::optional<double> eps;
};

void emit(const json& j, const Globals& g) { std::cout << (g.pretty ? j.dump(2) : j.dump()) << "\n"; }

quasicone::CertifyConfig config_from(const Globals& g) {
  quasicone::CertifyConfig cfg;
  cfg.seed = g.seed;
  cfg.tol = g.tol;
  cfg.grid_resolution = g.grid;
  return cfg;
}

int cmd_analyze(const std::string& input, const Globals& g) {
  const auto form = quasicone::load_form(input, g.eps);
  emit(quasicone::analyze(form, config_from(g)), g);
  return 0;
}

int cmd_det(const std::string& input, const Globals& g) {
  const auto form = quasicone::load_form(input, g.eps);
  const auto det = quasicone::analyze_determinant(form.form, form.reduced);
  if (g.pretty) {
    std::cout << "det T(y) = " << quasicone::format_polynomial(det.det, quasicone::closed_form_monomials()) << "\n";
    if (det.closed_form_residual) std::cout << "closed-form residual: " << *det.closed_form_residual << "\n";
    std::cout << "perfect square: " << (det.is_perfect_square ? "yes" : "no") << "\n";
    return 0;
  }
  json out = det;
  out["schema"] = quasicone::kSchema;
  out["form_echo"] = form.echo;
  if (form.reduced) {
    // Per-coefficient comparison in Eq (4.16) order.
    const auto closed = quasicone::reduced_det_closed_form(*form.reduced);
    json rows = json::array();
    for (const auto& e : quasicone::closed_form_monomials()) {
      rows.push_back({{"exp", e},
                      {"det", det.det.coefficient(e)},
                      {"closed_form", closed.coefficient(e)},
                      {"residual", det.det.coefficient(e) - closed.coefficient(e)}});
    }
    out["closed_form_coefficients"] = rows;
  }
  std::cout << out.dump() << "\n";
  return 0;
}

int cmd_lemma(int n, int trials, std::uint64_t seed, double eps, const Globals& g) {
  if (n < 2 || n > 8) throw Error(ErrorCode::kInvalidArgument, "--n must be in 2..8");
  if (trials < 1) throw Error(ErrorCode::kInvalidArgument, "--trials must be positive");
  emit(quasicone::run_lemma_campaign(n, trials, seed, eps), g);
  return 0;
}

int cmd_catalog(bool as_json, const Globals& g) {
  if (as_json) {
    json entries = json::array();
    for (const auto& e : quasicone::catalog_entries()) {
      entries.push_back({{"name", e.name},
                         {"provenance", e.provenance},
                         {"description", e.description},
                         {"parameter", e.has_parameter ? json("eps") : json()}});
    }
    emit({{"schema", quasicone::kSchema}, {"catalog", entries}}, g);
    return 0;
  }
  for (const auto& e : quasicone::catalog_entries()) std::cout << e.name << " (" << e.provenance << ")  " << e.description << "\n";
  return 0;
}

int fail(const std::string& code, const std::string& message, int status) {
  std::cerr << json{{"schema", quasicone::kSchema}, {"error", {{"code", code}, {"message", message}}}}.dump() << "\n";
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quasiconvex quadratic forms on 3x3 matrices: margins, acoustic determinants, extremality probes"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  double eps_flag = 0.0;
  app.add_option("--seed", g.seed, "Seed for all randomized searches")->capture_default_str();
  app.add_option("--tol", g.tol, "Tolerance")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--grid", g.grid, "Sphere grid resolution (grid^2 points)")->capture_default_str()->check(CLI::Range(8, 4096));
  auto* eps_opt = app.add_option("--eps", eps_flag, "Parameter for parameterized catalog forms (serre)");
  auto* json_flag = app.add_flag("--json", "Compact JSON output (default)");
  auto* pretty_flag = app.add_flag("--pretty", g.pretty, "Indented or human-readable output");
  json_flag->excludes(pretty_flag);

  std::string input;
  auto* analyze = app.add_subcommand("analyze", "Full report: margin, determinant and all probes");
  analyze->add_option("form", input, "Form JSON file or catalog name")->required();
  auto* det = app.add_subcommand("det", "Determinant of the acoustic matrix");
  det->add_option("form", input, "Form JSON file or catalog name")->required();

  int lemma_n = 3, lemma_trials = 100;
  std::uint64_t lemma_seed = 42;
  double lemma_eps = 0.0;
  auto* lemma = app.add_subcommand("lemma", "Randomized campaign for the minor-sum inequality");
  lemma->add_option("--n", lemma_n, "Matrix size")->capture_default_str();
  lemma->add_option("--trials", lemma_trials, "Number of random pairs")->capture_default_str();
  auto* lemma_seed_opt = lemma->add_option("--seed", lemma_seed, "Campaign seed");
  lemma->add_option("--eps", lemma_eps, "Diagonal shift applied to both matrices")->capture_default_str();

  bool catalog_json = false;
  auto* cat = app.add_subcommand("catalog", "List built-in forms");
  cat->add_flag("--json", catalog_json, "JSON listing");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what(), 64);
  }
  if (*eps_opt) g.eps = eps_flag;

  try {
    if (*analyze) return cmd_analyze(input, g);
    if (*det) return cmd_det(input, g);
    if (*lemma) return cmd_lemma(lemma_n, lemma_trials, *lemma_seed_opt ? lemma_seed : g.seed, lemma_eps, g);
    if (*cat) return cmd_catalog(catalog_json, g);
  } catch (const Error& e) {
    const int status = e.code() == ErrorCode::kInvalidArgument ? 64 : 2;
    return fail(quasicone::to_string(e.code()), e.what(), status);
  } catch (const std::exception& e) {
    return fail("internal", e.what(), 70);
  }
  return 0;
}
