#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "spongedim/cubes.hpp"
#include "spongedim/dimensions.hpp"
#include "spongedim/error.hpp"
#include "spongedim/lattice.hpp"
#include "spongedim/symbolic.hpp"

namespace spongedim {

inline constexpr const char* kToolVersion = "0.1.0";

struct AnalysisConfig {
  struct Budgets {
    std::uint64_t enumeration = 5'000'000;
    int depth = 3;
    int k_max = 10;
    std::uint64_t samples = 10'000;
    std::uint64_t seed = 1;
    bool operator==(const Budgets&) const = default;
  };
  struct Outputs {
    std::optional<std::string> report;
    std::optional<std::string> dump;
    bool operator==(const Outputs&) const = default;
  };

  std::vector<int> expansion;
  std::vector<std::vector<int>> digits;
  std::string kind = "full";
  std::optional<std::vector<std::vector<int>>> transition;
  Budgets budgets;
  Outputs outputs;

  bool operator==(const AnalysisConfig&) const = default;
};

namespace detail {

using nlohmann::json;

[[noreturn]] inline void config_error(const std::string& field, const std::string& what) {
  fail(ErrorKind::ConfigError, "field '" + field + "': " + what);
}

inline void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) config_error(where, "expected an object");
  for (const auto& [key, _] : obj.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) config_error(where.empty() ? key : where + "." + key, "unknown field");
  }
}

inline std::int64_t get_integer(const json& v, const std::string& field) {
  if (!v.is_number_integer()) config_error(field, "expected an integer");
  return v.get<std::int64_t>();
}

inline std::uint64_t get_count(const json& v, const std::string& field) {
  const auto n = get_integer(v, field);
  if (n < 0) config_error(field, "must be non-negative");
  return static_cast<std::uint64_t>(n);
}

inline std::vector<int> get_int_vector(const json& v, const std::string& field) {
  if (!v.is_array()) config_error(field, "expected an array of integers");
  std::vector<int> out;
  for (std::size_t j = 0; j < v.size(); ++j) out.push_back(static_cast<int>(get_integer(v[j], field + "[" + std::to_string(j) + "]")));
  return out;
}

inline std::vector<std::vector<int>> get_int_matrix(const json& v, const std::string& field) {
  if (!v.is_array()) config_error(field, "expected an array of integer arrays");
  std::vector<std::vector<int>> out;
  for (std::size_t j = 0; j < v.size(); ++j) out.push_back(get_int_vector(v[j], field + "[" + std::to_string(j) + "]"));
  return out;
}

/// Real as a JSON number with 15 significant digits; non-finite becomes null.
inline json real(double v) {
  if (!std::isfinite(v)) return nullptr;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return std::strtod(buf, nullptr);
}

inline json reals(std::span<const double> v) {
  json out = json::array();
  for (double x : v) out.push_back(real(x));
  return out;
}

inline json interval(const Interval& v) {
  if (v.exact()) return {{"value", real(v.lo)}};
  return {{"lo", real(v.lo)}, {"hi", real(v.hi)}};
}

inline json digit(const Digit& x) { return x.coords; }

}  // namespace detail

/// Parses a config document. Errors name the offending field, or carry the
/// parser's line and column.
inline AnalysisConfig parse_config(const std::string& text) {
  using detail::config_error;
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorKind::ConfigError, std::string("malformed config: ") + e.what());
  }
  detail::check_keys(doc, "", {"expansion", "digits", "kind", "transition", "budgets", "outputs"});
  AnalysisConfig cfg;
  if (!doc.contains("expansion")) config_error("expansion", "missing");
  if (!doc.contains("digits")) config_error("digits", "missing");
  cfg.expansion = detail::get_int_vector(doc["expansion"], "expansion");
  cfg.digits = detail::get_int_matrix(doc["digits"], "digits");
  if (doc.contains("kind")) {
    if (!doc["kind"].is_string()) config_error("kind", "expected \"full\" or \"sft\"");
    cfg.kind = doc["kind"].get<std::string>();
  }
  if (cfg.kind != "full" && cfg.kind != "sft") config_error("kind", "expected \"full\" or \"sft\", got \"" + cfg.kind + "\"");
  if (doc.contains("transition")) {
    if (cfg.kind != "sft") config_error("transition", "only allowed with kind \"sft\"");
    cfg.transition = detail::get_int_matrix(doc["transition"], "transition");
  } else if (cfg.kind == "sft") {
    config_error("transition", "required with kind \"sft\"");
  }
  if (doc.contains("budgets")) {
    const auto& b = doc["budgets"];
    detail::check_keys(b, "budgets", {"enumeration", "depth", "k_max", "samples", "seed"});
    if (b.contains("enumeration")) cfg.budgets.enumeration = detail::get_count(b["enumeration"], "budgets.enumeration");
    if (b.contains("depth")) cfg.budgets.depth = static_cast<int>(detail::get_count(b["depth"], "budgets.depth"));
    if (b.contains("k_max")) cfg.budgets.k_max = static_cast<int>(detail::get_count(b["k_max"], "budgets.k_max"));
    if (b.contains("samples")) cfg.budgets.samples = detail::get_count(b["samples"], "budgets.samples");
    if (b.contains("seed")) cfg.budgets.seed = detail::get_count(b["seed"], "budgets.seed");
    if (cfg.budgets.depth < 1) config_error("budgets.depth", "must be positive");
    if (cfg.budgets.k_max < 1) config_error("budgets.k_max", "must be positive");
  }
  if (doc.contains("outputs")) {
    const auto& o = doc["outputs"];
    detail::check_keys(o, "outputs", {"report", "dump"});
    for (const char* key : {"report", "dump"}) {
      if (!o.contains(key) || o[key].is_null()) continue;
      if (!o[key].is_string()) config_error(std::string("outputs.") + key, "expected a path string");
      (std::string(key) == "report" ? cfg.outputs.report : cfg.outputs.dump) = o[key].get<std::string>();
    }
  }

  const std::size_t d = cfg.expansion.size();
  for (std::size_t t = 0; t < cfg.digits.size(); ++t) {
    const auto& x = cfg.digits[t];
    const std::string name = "digits[" + std::to_string(t) + "] = " + to_string(Digit(x));
    if (x.size() != d) config_error(name, "expected " + std::to_string(d) + " coordinates");
    for (std::size_t j = 0; j < d; ++j)
      if (x[j] < 0 || x[j] >= cfg.expansion[j])
        config_error(name, "coordinate " + std::to_string(j + 1) + " must lie in [0, " + std::to_string(cfg.expansion[j] - 1) + "]");
  }
  if (cfg.transition) {
    const auto n = cfg.digits.size();
    if (cfg.transition->size() != n) config_error("transition", "expected " + std::to_string(n) + " rows");
    for (std::size_t r = 0; r < n; ++r)
      if ((*cfg.transition)[r].size() != n) config_error("transition[" + std::to_string(r) + "]", "expected " + std::to_string(n) + " entries");
  }
  return cfg;
}

inline AnalysisConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::ConfigError, "cannot read config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

inline nlohmann::json to_json(const AnalysisConfig& cfg) {
  nlohmann::json out{{"expansion", cfg.expansion}, {"digits", cfg.digits}, {"kind", cfg.kind}};
  if (cfg.transition) out["transition"] = *cfg.transition;
  out["budgets"] = {{"enumeration", cfg.budgets.enumeration},
                    {"depth", cfg.budgets.depth},
                    {"k_max", cfg.budgets.k_max},
                    {"samples", cfg.budgets.samples},
                    {"seed", cfg.budgets.seed}};
  nlohmann::json outputs = nlohmann::json::object();
  if (cfg.outputs.report) outputs["report"] = *cfg.outputs.report;
  if (cfg.outputs.dump) outputs["dump"] = *cfg.outputs.dump;
  out["outputs"] = outputs;
  return out;
}

struct Analysis {
  ExpansionSpec spec;
  SubshiftSpec x;
  ReportOptions options;
};

/// Validated spec and subshift; library errors are reported as config errors
/// since the inputs come straight from the file.
inline Analysis build_analysis(const AnalysisConfig& cfg) {
  try {
    ExpansionSpec spec = build_expansion(std::span<const int>(cfg.expansion));
    std::vector<Digit> digits;
    for (const auto& x : cfg.digits) digits.emplace_back(x);
    validate_digits(spec, digits);
    SubshiftSpec x = cfg.kind == "sft" ? SubshiftSpec::sft(digits, Matrix<int>::from_rows(*cfg.transition)) : SubshiftSpec::full(digits);
    Analysis a{std::move(spec), std::move(x), {}};
    a.options.depth = cfg.budgets.depth;
    a.options.k_max = cfg.budgets.k_max;
    a.options.budget.max_words = cfg.budgets.enumeration;
    return a;
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::ConfigError) throw;
    fail(ErrorKind::ConfigError, e.what());
  }
}

inline nlohmann::json to_json(const DimensionReport& r, const SubshiftSpec& x, const ExpansionSpec& spec) {
  using detail::real;
  using detail::reals;
  nlohmann::json out;
  out["kind"] = x.is_full() ? "full" : "sft";
  out["d"] = r.d;
  out["weak_spec_gap"] = r.weak_spec_gap;
  out["dim_box"] = real(r.dim_box);
  out["dim_box_symbolic"] = r.dim_box_symbolic ? nlohmann::json(*r.dim_box_symbolic) : nlohmann::json(nullptr);
  out["dim_haus"] = detail::interval(r.dim_haus);
  out["ly_dimension_of_mme"] = detail::interval(r.ly_of_mme);
  out["verdict_A"] = to_string(r.verdict_A);
  out["verdict_C"] = to_string(r.verdict_C);
  out["haus_measure_class"] = to_string(r.haus_class);
  if (!x.pruned().empty()) {
    nlohmann::json pruned = nlohmann::json::array();
    for (const auto& p : x.pruned()) pruned.push_back(detail::digit(p));
    out["pruned_digits"] = pruned;
  }
  if (r.fiber) out["fiber_profile"] = {{"f", r.fiber->f}, {"uniform_fiber", r.fiber->uniform_fiber}};
  if (r.full_dim) {
    nlohmann::json z = nlohmann::json::array();
    for (const auto& level : r.full_dim->z_levels) z.push_back(reals(level));
    out["full_dim_marginal"] = {{"marginal", reals(r.full_dim->marginal)}, {"Z", real(r.full_dim->Z)}, {"z_levels", z}};
  }
  if (r.mme) {
    out["mme_equals_full_dim"] = {{"equal", r.mme->equal}, {"log_products", reals(r.mme->log_products)}};
  }
  nlohmann::json witnesses = nlohmann::json::object();
  if (r.classification) {
    const auto& c = *r.classification;
    nlohmann::json cls{{"nonuniform_levels", c.nonuniform_levels}, {"deltas", reals(c.deltas)}};
    if (c.uniform_level) cls["uniform_level"] = *c.uniform_level;
    if (c.witness) cls["q"] = reals(*c.witness);
    if (c.peres) {
      const auto& pc = *c.peres;
      const auto at = std::min_element(pc.normalized.begin(), pc.normalized.end()) - pc.normalized.begin();
      cls["peres"] = {{"constant", real(pc.constant)}, {"argmin_k", real(pc.k[at])}, {"clamped", pc.clamped}};
    }
    witnesses["classifier"] = cls;
  }
  if (r.cylinder_witness) {
    const auto& w = *r.cylinder_witness;
    const LevelProjection proj = project_levels(spec, x.digits());
    nlohmann::json word = nlohmann::json::array();
    for (int a : w.word) word.push_back(detail::digit(proj.level(w.level).symbols[a]));
    witnesses["cylinder"] = {{"level", w.level}, {"word", word}, {"pushed_mme", real(w.pushed)}, {"factor_mme", real(w.maximal)}};
  }
  out["witnesses"] = witnesses;
  if (r.pressure) {
    out["pressure"] = {{"estimates", reals(r.pressure->estimates)},
                       {"running_inf", reals(r.pressure->running_inf)},
                       {"increments", reals(r.pressure->increments)},
                       {"dimension_estimate", detail::interval(r.pressure->dimension)}};
    out["agreement_depth"] = r.agreement_depth;
    nlohmann::json ratios = nlohmann::json::array();
    for (const auto& v : r.fiber_ratios) ratios.push_back(reals(v));
    out["fiber_ratios"] = ratios;
  }
  return out;
}

/// Full report document: analysis fields, tool version, config echo, wall time.
inline nlohmann::json report_document(const DimensionReport& r, const Analysis& a, const AnalysisConfig& cfg, double wall_seconds) {
  nlohmann::json out = to_json(r, a.x, a.spec);
  out["tool_version"] = kToolVersion;
  out["config"] = to_json(cfg);
  out["wall_time_seconds"] = detail::real(wall_seconds);
  return out;
}

inline nlohmann::json to_json(const PressureResult& p) {
  return {{"estimates", detail::reals(p.estimates)},
          {"running_inf", detail::reals(p.running_inf)},
          {"increments", detail::reals(p.increments)},
          {"upper", detail::real(p.upper)},
          {"dimension", detail::interval(p.dimension)}};
}

inline nlohmann::json to_json(const BoxSlope& b) {
  return {{"k", b.k}, {"log_counts", detail::reals(b.log_counts)}, {"slope", detail::real(b.slope)},
          {"intercept", detail::real(b.intercept)}, {"residuals", detail::reals(b.residuals)}};
}

inline nlohmann::json to_json(const DensityDiagnostic& dd) {
  nlohmann::json out{{"k", dd.k},
                     {"n_samples", dd.n_samples},
                     {"L_k", detail::real(dd.L_k)},
                     {"sample_mean", detail::real(dd.sample_mean)},
                     {"sample_var", detail::real(dd.sample_var)},
                     {"verdict", to_string(dd.verdict)}};
  if (dd.theoretical_mean) out["theoretical_mean"] = detail::real(*dd.theoretical_mean);
  if (dd.theoretical_var) out["theoretical_var"] = detail::real(*dd.theoretical_var);
  if (dd.nu_closed_form) out["nu_closed_form"] = detail::real(*dd.nu_closed_form);
  return out;
}

}  // namespace spongedim
