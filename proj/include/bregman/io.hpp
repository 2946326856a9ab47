#pragma once

#include <charconv>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bregman/error.hpp"
#include "bregman/sweep.hpp"

namespace bregman::io {

using json = nlohmann::ordered_json;

/// Where a sweep writes its artefacts.
struct OutputPaths {
  std::string dir = ".";
  std::string csv = "results.csv";
  std::string report = "report.json";
};

struct RunConfig {
  ExperimentConfig experiment;
  OutputPaths output;
};

/// Shortest round-trip text for a double, locale independent, 17 significant digits.
inline std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

namespace detail {

[[noreturn]] inline void bad(const std::string& where, const std::string& what) {
  throw Error(ErrorKind::InvalidConfig, where + ": " + what);
}

inline void only_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) bad(where, "expected an object");
  for (const auto& [key, _] : obj.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) bad(where, "unknown key '" + key + "'");
  }
}

inline double number(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) bad(where, std::string("missing '") + key + "'");
  const json& v = obj.at(key);
  if (!v.is_number()) bad(where, std::string("'") + key + "' must be a number");
  return v.get<double>();
}

inline double number_or(const json& obj, const char* key, double fallback, const std::string& where) {
  return obj.contains(key) ? number(obj, key, where) : fallback;
}

inline std::int64_t integer(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) bad(where, std::string("missing '") + key + "'");
  const json& v = obj.at(key);
  if (!v.is_number_integer()) bad(where, std::string("'") + key + "' must be an integer");
  return v.get<std::int64_t>();
}

inline std::uint64_t seed_value(const json& v, const std::string& where) {
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0) bad(where, "seed must be a non-negative integer");
  return v.get<std::uint64_t>();
}

inline std::string kind(const json& obj, const std::string& where) {
  if (!obj.is_object() || !obj.contains("kind") || !obj.at("kind").is_string()) {
    bad(where, "missing string 'kind'");
  }
  return obj.at("kind").get<std::string>();
}

inline OperatorPreset parse_operator(const json& j) {
  const std::string where = "operator";
  const std::string k = kind(j, where);
  if (k == "diagonal_decay") {
    only_keys(j, where, {"kind", "n", "a"});
    return preset::DiagonalDecay{integer(j, "n", where), number(j, "a", where)};
  }
  if (k == "integration") {
    only_keys(j, where, {"kind", "n"});
    return preset::Integration{integer(j, "n", where)};
  }
  if (k == "random_gaussian") {
    only_keys(j, where, {"kind", "m", "n", "seed"});
    return preset::RandomGaussian{integer(j, "m", where), integer(j, "n", where),
                                  j.contains("seed") ? seed_value(j.at("seed"), where) : 0};
  }
  bad(where, "unknown kind '" + k + "'");
}

inline Eigen::Index operator_cols(const OperatorPreset& op) {
  return std::visit(overloaded{
                        [](const preset::DiagonalDecay& d) { return d.n; },
                        [](const preset::Integration& d) { return d.n; },
                        [](const preset::RandomGaussian& d) { return d.n; },
                    },
                    op);
}

inline RegulariserSpec parse_regulariser(const json& j, Eigen::Index n) {
  const std::string where = "regulariser";
  const std::string k = kind(j, where);
  try {
    if (k == "quadratic") {
      only_keys(j, where, {"kind"});
      return quadratic();
    }
    if (k == "power_sum") {
      only_keys(j, where, {"kind", "p", "weight"});
      return power_sum(number(j, "p", where), number_or(j, "weight", 1.0, where));
    }
    if (k == "power_sum_high") {
      only_keys(j, where, {"kind", "p", "weight"});
      const double w = number_or(j, "weight", 1.0 / static_cast<double>(std::max<Eigen::Index>(n, 1)), where);
      return power_sum_high(number(j, "p", where), w);
    }
    if (k == "total_variation") {
      only_keys(j, where, {"kind"});
      return total_variation();
    }
    if (k == "huber") {
      only_keys(j, where, {"kind", "gamma"});
      return huber(number_or(j, "gamma", 1.0, where));
    }
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::InvalidConfig) throw;
    bad(where, e.what());
  }
  bad(where, "unknown kind '" + k + "'");
}

inline Regime parse_regime(const json& j) {
  const std::string where = "regime";
  const std::string k = kind(j, where);
  if (k == "basic") {
    only_keys(j, where, {"kind"});
    return regime::Basic{};
  }
  if (k == "pconvex") {
    only_keys(j, where, {"kind", "p"});
    return regime::PConvex{number(j, "p", where)};
  }
  if (k == "qco" || k == "qcoconvex") {
    only_keys(j, where, {"kind", "q"});
    return regime::QCoconvex{number(j, "q", where)};
  }
  bad(where, "unknown kind '" + k + "'");
}

inline Measure parse_measure(const json& j) {
  if (!j.is_string()) bad("measures", "entries must be strings");
  const auto s = j.get<std::string>();
  if (s == "bregman") return Measure::Bregman;
  if (s == "sym_bregman") return Measure::SymBregman;
  if (s == "norm") return Measure::Norm;
  if (s == "residual") return Measure::Residual;
  bad("measures", "unknown measure '" + s + "'");
}

}  // namespace detail

/**
 * Parses and schema-checks a run configuration. Unknown keys at any level
 * are rejected before anything is computed.
 */
inline RunConfig parse_run_config(const json& j) {
  using namespace detail;
  only_keys(j, "config",
            {"operator", "regulariser", "nu", "regime", "delta_grid", "alpha_constant", "seed", "fit_window",
             "measures", "omega_seed", "u_dagger", "solver", "tolerances", "output"});
  for (const char* key : {"operator", "regulariser", "nu", "regime"}) {
    if (!j.contains(key)) bad("config", std::string("missing '") + key + "'");
  }

  RunConfig rc;
  ExperimentConfig& cfg = rc.experiment;
  cfg.op = parse_operator(j.at("operator"));
  cfg.spec = parse_regulariser(j.at("regulariser"), operator_cols(cfg.op));
  cfg.nu = number(j, "nu", "config");
  cfg.regime = parse_regime(j.at("regime"));

  if (j.contains("delta_grid")) {
    const json& g = j.at("delta_grid");
    only_keys(g, "delta_grid", {"count", "max", "min"});
    if (g.contains("count")) cfg.grid.count = static_cast<int>(integer(g, "count", "delta_grid"));
    cfg.grid.delta_max = number_or(g, "max", cfg.grid.delta_max, "delta_grid");
    cfg.grid.delta_min = number_or(g, "min", cfg.grid.delta_min, "delta_grid");
  }
  cfg.alpha_constant = number_or(j, "alpha_constant", 1.0, "config");
  if (j.contains("seed")) cfg.seed = seed_value(j.at("seed"), "seed");
  if (j.contains("fit_window")) {
    const json& w = j.at("fit_window");
    auto index_ok = [](const json& x) { return x.is_number_integer() && x.get<std::int64_t>() >= 0; };
    if (!w.is_array() || w.size() != 2 || !index_ok(w[0]) || !index_ok(w[1])) {
      bad("fit_window", "expected [first, last] grid indices");
    }
    cfg.fit_window = FitWindow{w[0].get<std::size_t>(), w[1].get<std::size_t>()};
  }
  if (j.contains("measures")) {
    const json& m = j.at("measures");
    if (!m.is_array()) bad("measures", "expected an array");
    cfg.measures.clear();
    for (const auto& e : m) cfg.measures.push_back(parse_measure(e));
  }
  if (j.contains("omega_seed")) cfg.omega_seed = seed_value(j.at("omega_seed"), "omega_seed");
  if (j.contains("u_dagger")) {
    const json& u = j.at("u_dagger");
    if (!u.is_array() || u.empty()) bad("u_dagger", "expected a non-empty array of numbers");
    Vector vec(static_cast<Eigen::Index>(u.size()));
    for (std::size_t i = 0; i < u.size(); ++i) {
      if (!u[i].is_number()) bad("u_dagger", "expected numbers");
      vec(static_cast<Eigen::Index>(i)) = u[i].get<double>();
    }
    cfg.u_dagger = std::move(vec);
    // Observational sweeps default to the measures that need no certificate.
    if (!j.contains("measures")) cfg.measures = {Measure::Norm, Measure::Residual};
  }
  if (j.contains("solver")) {
    const json& s = j.at("solver");
    only_keys(s, "solver", {"kind", "max_iterations", "kkt_tolerance", "step_scale"});
    if (s.contains("kind")) {
      const std::string k = kind(s, "solver");
      if (k == "auto") cfg.solver = SolverKind::Auto;
      else if (k == "iterative") cfg.solver = SolverKind::Iterative;
      else if (k == "direct") cfg.solver = SolverKind::Direct;
      else bad("solver", "unknown kind '" + k + "'");
    }
    if (s.contains("max_iterations")) {
      cfg.solve_options.max_iterations = static_cast<int>(integer(s, "max_iterations", "solver"));
    }
    cfg.solve_options.kkt_tolerance = number_or(s, "kkt_tolerance", cfg.solve_options.kkt_tolerance, "solver");
    cfg.solve_options.step_scale = number_or(s, "step_scale", cfg.solve_options.step_scale, "solver");
  }
  if (j.contains("tolerances")) {
    const json& t = j.at("tolerances");
    only_keys(t, "tolerances", {"bregman", "sym_bregman", "norm", "min_r_squared", "two_sided"});
    cfg.tolerances.bregman = number_or(t, "bregman", cfg.tolerances.bregman, "tolerances");
    cfg.tolerances.sym_bregman = number_or(t, "sym_bregman", cfg.tolerances.sym_bregman, "tolerances");
    cfg.tolerances.norm = number_or(t, "norm", cfg.tolerances.norm, "tolerances");
    if (t.contains("min_r_squared")) cfg.tolerances.min_r_squared = number(t, "min_r_squared", "tolerances");
    if (t.contains("two_sided")) {
      if (!t.at("two_sided").is_boolean()) bad("tolerances", "'two_sided' must be a boolean");
      cfg.tolerances.two_sided = t.at("two_sided").get<bool>();
    }
  }
  if (j.contains("output")) {
    const json& o = j.at("output");
    only_keys(o, "output", {"dir", "csv", "report"});
    for (const char* key : {"dir", "csv", "report"}) {
      if (o.contains(key) && !o.at(key).is_string()) bad("output", std::string("'") + key + "' must be a string");
    }
    if (o.contains("dir")) rc.output.dir = o.at("dir").get<std::string>();
    if (o.contains("csv")) rc.output.csv = o.at("csv").get<std::string>();
    if (o.contains("report")) rc.output.report = o.at("report").get<std::string>();
  }
  return rc;
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::InvalidConfig, "cannot read config file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::InvalidConfig, "malformed JSON in '" + path + "': " + e.what());
  }
  return parse_run_config(j);
}

inline constexpr const char* kCsvHeader = "delta,alpha,iterations,bregman,sym_bregman,norm_err,residual";

inline std::string results_csv(const RateReport& report) {
  std::ostringstream out;
  out << kCsvHeader << '\n';
  auto field = [](const std::optional<double>& x) { return x ? format_double(*x) : std::string(); };
  for (const RatePoint& p : report.points) {
    out << format_double(p.delta) << ',' << format_double(p.alpha) << ',' << p.iterations << ','
        << field(p.bregman) << ',' << field(p.sym_bregman) << ',' << field(p.norm) << ',' << field(p.residual)
        << '\n';
  }
  return out.str();
}

inline json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

inline json optional_number(const std::optional<double>& x) { return x ? number_or_null(*x) : json(nullptr); }

inline json to_json(const ExponentPair& e) {
  return json{{"theta_alpha", e.theta_alpha}, {"rate", e.rate}, {"measure", to_string(e.measure)}};
}

inline json report_json(const RateReport& report) {
  json j;
  j["theory"] = to_json(report.theory);
  j["norm_rate"] = optional_number(report.norm_rate);
  j["observational"] = report.observational;
  j["passed"] = report.passed();

  json points = json::array();
  for (const RatePoint& p : report.points) {
    points.push_back(json{{"delta", p.delta},
                          {"alpha", p.alpha},
                          {"iterations", p.iterations},
                          {"iteration_limit", p.iteration_limit},
                          {"kkt_residual", number_or_null(p.kkt_residual)},
                          {"errors",
                           json{{"bregman", optional_number(p.bregman)},
                                {"sym_bregman", optional_number(p.sym_bregman)},
                                {"norm", optional_number(p.norm)},
                                {"residual", optional_number(p.residual)}}},
                          {"objective", p.objective},
                          {"objective_bound", p.objective_bound},
                          {"reg_value", p.reg_value},
                          {"reg_value_bound", p.reg_value_bound}});
  }
  j["points"] = std::move(points);

  json fits = json::object();
  for (const MeasureFit& f : report.fits) {
    json entry{{"points_used", f.points_used}};
    if (f.fit) {
      entry["slope"] = number_or_null(f.fit->slope);
      entry["intercept"] = number_or_null(f.fit->intercept);
      entry["r_squared"] = number_or_null(f.fit->r_squared);
    } else {
      entry["slope"] = nullptr;
      entry["intercept"] = nullptr;
      entry["r_squared"] = nullptr;
    }
    if (!f.note.empty()) entry["note"] = f.note;
    fits[to_string(f.measure)] = std::move(entry);
  }
  j["fitted"] = std::move(fits);

  json verdicts = json::array();
  for (const Verdict& v : report.verdicts) {
    verdicts.push_back(json{{"measure", to_string(v.measure)},
                            {"target", v.target},
                            {"slope", number_or_null(v.slope)},
                            {"deviation", number_or_null(v.deviation)},
                            {"tolerance", v.tolerance},
                            {"two_sided", v.two_sided},
                            {"min_r_squared", optional_number(v.min_r_squared)},
                            {"r_squared", number_or_null(v.r_squared)},
                            {"pass", v.pass}});
  }
  j["verdict"] = std::move(verdicts);
  j["notes"] = report.notes;
  return j;
}

inline json vector_json(const Vector& x) {
  json a = json::array();
  for (Eigen::Index i = 0; i < x.size(); ++i) a.push_back(number_or_null(x(i)));
  return a;
}

inline json solve_json(const SolveResult& r) {
  return json{{"u", vector_json(r.u)},
              {"omega", vector_json(r.omega)},
              {"xi", vector_json(r.xi)},
              {"kkt_residual", number_or_null(r.kkt_residual)},
              {"objective", number_or_null(r.objective)},
              {"iterations", r.iterations},
              {"converged", r.converged()}};
}

}  // namespace bregman::io
