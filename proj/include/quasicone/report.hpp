#pragma once

// Form ingestion (JSON schema "quasicone/1") and the full analysis report.

#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include <json.hpp>

#include "quasicone/determinant.hpp"
#include "quasicone/error.hpp"
#include "quasicone/forms.hpp"
#include "quasicone/margin.hpp"
#include "quasicone/probes.hpp"

namespace quasicone {

inline constexpr const char* kSchema = "quasicone/1";
inline constexpr const char* kToolVersion = "0.1.0";

struct LoadedForm {
  QuadraticForm form;
  /// Canonical JSON that reproduces `form` when parsed again.
  nlohmann::json echo;
  /// Paired-layout parameters when the input has them (closed-form det check).
  std::optional<ReducedOrthotropicForm> reduced;
};

namespace detail {

inline double number_field(const nlohmann::json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) throw Error(ErrorCode::kParse, where + ": missing field '" + key + "'");
  if (!j.at(key).is_number()) throw Error(ErrorCode::kParse, where + ": field '" + key + "' must be a number");
  return j.at(key).get<double>();
}

inline Mat3 matrix_field(const nlohmann::json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) throw Error(ErrorCode::kParse, where + ": missing field '" + key + "'");
  const auto& m = j.at(key);
  if (!m.is_array() || m.size() != 3) throw Error(ErrorCode::kParse, where + ": field '" + key + "' must be a 3x3 array");
  Mat3 a;
  for (int i = 0; i < 3; ++i) {
    if (!m[i].is_array() || m[i].size() != 3) {
      throw Error(ErrorCode::kParse, where + ": field '" + key + "' row " + std::to_string(i) + " must have 3 numbers");
    }
    for (int k = 0; k < 3; ++k) {
      if (!m[i][k].is_number()) {
        throw Error(ErrorCode::kParse, where + ": field '" + key + "[" + std::to_string(i) + "][" + std::to_string(k) + "]' must be a number");
      }
      a(i, k) = m[i][k].get<double>();
    }
  }
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, a.cwiseAbs().maxCoeff())) {
    throw Error(ErrorCode::kParse, where + ": field '" + key + "' must be symmetric");
  }
  return a;
}

/// "serre(0.1)" -> ("serre", 0.1).
inline std::pair<std::string, std::optional<double>> split_catalog_name(const std::string& s) {
  const auto open = s.find('(');
  if (open == std::string::npos || s.back() != ')') return {s, std::nullopt};
  const std::string arg = s.substr(open + 1, s.size() - open - 2);
  try {
    std::size_t used = 0;
    const double v = std::stod(arg, &used);
    if (used != arg.size()) throw std::invalid_argument(arg);
    return {s.substr(0, open), v};
  } catch (const std::exception&) {
    throw Error(ErrorCode::kParse, "catalog name '" + s + "': parameter is not a number");
  }
}

inline nlohmann::json gram_upper(const Gram& g) {
  nlohmann::json e = nlohmann::json::array();
  for (int i = 0; i < 9; ++i)
    for (int k = i; k < 9; ++k) e.push_back(g(i, k));
  return e;
}

}  // namespace detail

/// Form JSON: {"kind": "gram"|"voigt"|"reduced"|"catalog", ...}.
///   gram:    "entries": 45 upper-triangle Gram entries, row-major over the
///            index map (i,j) -> 3i+j.
///   voigt:   "c11".."c66".
///   reduced: "a" (symmetric 3x3), "b", "c", "d", optional "layout":
///            "paired" (default) or "single_shear".
///   catalog: "name", optional "eps".
inline LoadedForm parse_form(const nlohmann::json& j, std::optional<double> eps_override = std::nullopt) {
  if (!j.is_object()) throw Error(ErrorCode::kParse, "form: expected a JSON object");
  if (!j.contains("kind") || !j.at("kind").is_string()) throw Error(ErrorCode::kParse, "form: missing string field 'kind'");
  const std::string kind = j.at("kind").get<std::string>();
  LoadedForm out;
  if (kind == "gram") {
    if (!j.contains("entries") || !j.at("entries").is_array() || j.at("entries").size() != 45) {
      throw Error(ErrorCode::kParse, "gram: field 'entries' must be an array of 45 numbers");
    }
    Gram g;
    int idx = 0;
    for (int i = 0; i < 9; ++i) {
      for (int k = i; k < 9; ++k, ++idx) {
        const auto& v = j.at("entries")[idx];
        if (!v.is_number()) throw Error(ErrorCode::kParse, "gram: entries[" + std::to_string(idx) + "] must be a number");
        g(i, k) = g(k, i) = v.get<double>();
      }
    }
    out.form = QuadraticForm(g);
    out.echo = {{"kind", "gram"}, {"entries", detail::gram_upper(g)}};
  } else if (kind == "voigt") {
    OrthotropicCoefficients c;
    const std::array<std::pair<const char*, double*>, 9> fields{{{"c11", &c.c11}, {"c22", &c.c22}, {"c33", &c.c33},
                                                                  {"c12", &c.c12}, {"c13", &c.c13}, {"c23", &c.c23},
                                                                  {"c44", &c.c44}, {"c55", &c.c55}, {"c66", &c.c66}}};
    out.echo = {{"kind", "voigt"}};
    for (const auto& [name, slot] : fields) {
      *slot = detail::number_field(j, name, "voigt");
      out.echo[name] = *slot;
    }
    out.form = form_from_voigt(c);
    out.reduced = reduce_modulo_null_lagrangians(c);
  } else if (kind == "reduced") {
    ReducedOrthotropicForm r;
    r.a = detail::matrix_field(j, "a", "reduced");
    r.b = detail::number_field(j, "b", "reduced");
    r.c = detail::number_field(j, "c", "reduced");
    r.d = detail::number_field(j, "d", "reduced");
    const std::string layout = j.value("layout", std::string("paired"));
    if (layout != "paired" && layout != "single_shear") {
      throw Error(ErrorCode::kParse, "reduced: field 'layout' must be \"paired\" or \"single_shear\"");
    }
    out.echo = {{"kind", "reduced"}, {"a", matrix_json(r.a)}, {"b", r.b}, {"c", r.c}, {"d", r.d}, {"layout", layout}};
    if (layout == "paired") {
      out.form = form_from_reduced(r);
      out.reduced = r;
    } else {
      out.form = form_from_single_shear(r.a, r.b, r.c, r.d);
    }
  } else if (kind == "catalog") {
    if (!j.contains("name") || !j.at("name").is_string()) throw Error(ErrorCode::kParse, "catalog: missing string field 'name'");
    auto [name, inline_eps] = detail::split_catalog_name(j.at("name").get<std::string>());
    double eps = inline_eps.value_or(0.0);
    if (j.contains("eps")) eps = detail::number_field(j, "eps", "catalog");
    if (eps_override) eps = *eps_override;
    out.form = catalog(name, eps);
    out.reduced = catalog_reduced(name);
    out.echo = {{"kind", "catalog"}, {"name", name}};
    if (name == "serre") out.echo["eps"] = eps;
  } else {
    throw Error(ErrorCode::kParse, "form: unknown kind '" + kind + "'");
  }
  out.echo["schema"] = kSchema;
  return out;
}

/// Parses JSON text, reporting syntax errors with line and column.
inline nlohmann::json parse_json_text(const std::string& text, const std::string& source) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw Error(ErrorCode::kParse, source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + e.what());
  }
}

/// A path to a form JSON file, or a catalog name such as "choi_lam" or
/// "serre(0.1)".
inline LoadedForm load_form(const std::string& arg, std::optional<double> eps_override = std::nullopt) {
  std::ifstream in(arg);
  if (in) {
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_form(parse_json_text(ss.str(), arg), eps_override);
  }
  return parse_form(nlohmann::json{{"kind", "catalog"}, {"name", arg}}, eps_override);
}

inline nlohmann::json error_json(const Error& e) {
  return {{"schema", kSchema}, {"error", {{"code", to_string(e.code())}, {"message", e.what()}}}};
}

/// Runs a probe; certify preconditions become a structured entry instead of
/// aborting the whole report.
template <typename Fn>
nlohmann::json probe_entry(const std::string& kind, Fn&& fn) {
  try {
    return nlohmann::json(fn());
  } catch (const Error& e) {
    return {{"kind", kind}, {"verdict", "inconclusive"}, {"error", error_json(e)["error"]}};
  }
}

inline nlohmann::json analyze(const LoadedForm& in, const CertifyConfig& cfg) {
  cfg.validate();
  nlohmann::json rep;
  rep["schema"] = kSchema;
  rep["tool_version"] = kToolVersion;
  rep["form_echo"] = in.echo;
  rep["config"] = cfg;
  rep["seed"] = cfg.seed;
  rep["margin_report"] = quasiconvexity_margin(in.form, cfg);
  const DetReport det = analyze_determinant(in.form, in.reduced);
  rep["det_report"] = det;
  nlohmann::json probes;
  probes["milton"] = probe_entry("milton", [&] { return milton_extremality_probe(in.form, cfg); });
  probes["extreme_point"] = probe_entry("extreme_point", [&] { return extreme_point_probe(in.form, cfg); });
  probes["extremal_polynomial"] =
      probe_entry("extremal_polynomial", [&] { return extremal_polynomial_probe(det.det, cfg); });
  probes["polyconvexity"] = probe_entry("polyconvexity", [&] { return polyconvexity_test(in.form, cfg); });
  rep["probes"] = std::move(probes);
  return rep;
}

}  // namespace quasicone
