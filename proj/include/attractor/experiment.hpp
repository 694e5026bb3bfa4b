#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "attractor/attractive.hpp"
#include "attractor/classes.hpp"
#include "attractor/errors.hpp"
#include "attractor/io.hpp"
#include "attractor/iterate.hpp"
#include "attractor/mappings.hpp"

namespace attractor {

// ---------------------------------------------------------------------------
// Configuration types

struct SamplerSpec {
  std::uint64_t seed = 0;
  std::size_t count = 0;
  Box box{};

  friend bool operator==(const SamplerSpec&, const SamplerSpec&) = default;
};

/// Explicit generator list or a seeded draw from the mapping's domain.
using GeneratorSpec = std::variant<std::vector<Vector>, SamplerSpec>;

struct HalpernSpec {
  Vector u;
  Vector x1;
  Schedule alpha;
  Schedule beta;

  friend bool operator==(const HalpernSpec&, const HalpernSpec&) = default;
};

struct MannSpec {
  Vector x1;
  Schedule alpha;

  friend bool operator==(const MannSpec&, const MannSpec&) = default;
};

using SchemeSpec = std::variant<HalpernSpec, MannSpec>;

enum class Expectation { satisfied, violated };

struct CheckSpec {
  enum class Kind { quasinonexpansive_wrt, generalized_hybrid, wmgh };

  Kind kind = Kind::generalized_hybrid;
  std::vector<Vector> reference;  // quasinonexpansive_wrt only
  GHCoefficients gh{};
  WMGHCoefficients wmgh{};
  std::size_t samples = 10'000;
  std::uint64_t seed = 0;
  Box box{};
  Expectation expect = Expectation::satisfied;

  friend bool operator==(const CheckSpec&, const CheckSpec&) = default;
};

struct ScanSpec {
  double lo = -2.0;
  double hi = 2.0;
  double step = 0.25;

  friend bool operator==(const ScanSpec&, const ScanSpec&) = default;
};

struct Tolerances {
  double class_tol = kDefaultClassTolerance;
  double stop_tol = kMannStopTol;  // filled per scheme at load time
  double projection_tol = 1e-10;
  double scan_tol = 1e-9;
  double member_tol = 1e-9;
  double vacuous_threshold = kVacuousThreshold;

  friend bool operator==(const Tolerances&, const Tolerances&) = default;
};

struct ExperimentConfig {
  std::string name;
  std::string mapping;
  std::optional<std::size_t> dimension;
  GeneratorSpec generators;
  std::optional<SchemeSpec> scheme;
  std::vector<CheckSpec> checks;
  std::optional<ScanSpec> scan;
  std::string output = "out";
  Tolerances tolerances{};
  std::size_t max_steps = kDefaultMaxSteps;
  std::size_t projection_max_iter = 10'000;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

// ---------------------------------------------------------------------------
// Parsing

namespace detail {

inline void reject_unknown_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigSemanticError(where, "expected an object");
  for (const auto& [key, _] : obj.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      throw ConfigSemanticError(where.empty() ? key : where + "." + key, "unknown key");
    }
  }
}

inline double get_real(const json& j, const std::string& field) {
  if (!j.is_number()) throw ConfigSemanticError(field, "expected a number");
  return j.get<double>();
}

inline std::uint64_t get_seed(const json& j, const std::string& field) {
  if (!j.is_number_integer() || j.get<std::int64_t>() < 0) {
    if (!j.is_number_unsigned()) throw ConfigSemanticError(field, "expected a non-negative integer");
  }
  return j.get<std::uint64_t>();
}

inline std::size_t get_count(const json& j, const std::string& field) {
  if (!j.is_number_integer() || j.get<std::int64_t>() < 0) {
    if (!j.is_number_unsigned()) throw ConfigSemanticError(field, "expected a non-negative integer");
  }
  return j.get<std::size_t>();
}

/// A point is a bare number (d = 1) or an array of numbers.
inline Vector parse_point(const json& j, std::size_t dimension, const std::string& field) {
  std::vector<double> coords;
  if (j.is_number()) {
    coords.push_back(j.get<double>());
  } else if (j.is_array()) {
    for (const json& c : j) coords.push_back(get_real(c, field));
  } else {
    throw ConfigSemanticError(field, "expected a number or an array of numbers");
  }
  if (coords.size() != dimension) {
    throw ConfigSemanticError(field, "point has dimension " + std::to_string(coords.size()) + ", mapping has " +
                                         std::to_string(dimension));
  }
  try {
    return Vector(std::move(coords));
  } catch (const Error& e) {
    throw ConfigSemanticError(field, e.what());
  }
}

inline std::vector<Vector> parse_points(const json& j, std::size_t dimension, const std::string& field) {
  if (!j.is_array()) throw ConfigSemanticError(field, "expected an array of points");
  std::vector<Vector> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(parse_point(j[i], dimension, field + "[" + std::to_string(i) + "]"));
  }
  return out;
}

inline Box parse_box(const json& j, const std::string& field) {
  if (!j.is_array() || j.size() != 2) throw ConfigSemanticError(field, "expected [lo, hi]");
  Box b{get_real(j[0], field), get_real(j[1], field)};
  if (!(b.hi > b.lo)) throw ConfigSemanticError(field, "box must satisfy lo < hi");
  return b;
}

inline Schedule parse_schedule(const json& j, const std::string& field) {
  reject_unknown_keys(j, field, {"constant", "power"});
  if (j.size() != 1) throw ConfigSemanticError(field, "expected exactly one of 'constant' or 'power'");
  if (j.contains("constant")) return Schedule::constant(get_real(j["constant"], field + ".constant"));
  const json& p = j["power"];
  const std::string pf = field + ".power";
  reject_unknown_keys(p, pf, {"scale", "exponent", "shift"});
  if (!p.contains("exponent")) throw ConfigSemanticError(pf + ".exponent", "missing");
  return Schedule::power(p.contains("scale") ? get_real(p["scale"], pf + ".scale") : 1.0,
                         get_real(p["exponent"], pf + ".exponent"),
                         p.contains("shift") ? get_real(p["shift"], pf + ".shift") : 0.0);
}

template <typename Fn>
auto required(const json& obj, const char* key, const std::string& field, Fn&& fn) {
  if (!obj.contains(key)) throw ConfigSemanticError(field.empty() ? key : field + "." + key, "missing");
  return fn(obj[key], field.empty() ? std::string(key) : field + "." + key);
}

inline CheckSpec parse_check(const json& j, std::size_t dimension, const std::string& field) {
  reject_unknown_keys(j, field,
                      {"type", "reference", "alpha", "beta", "coefficients", "samples", "seed", "box", "expect"});
  CheckSpec c;
  const std::string type = required(j, "type", field, [](const json& v, const std::string& f) {
    if (!v.is_string()) throw ConfigSemanticError(f, "expected a string");
    return v.get<std::string>();
  });
  auto forbid = [&](std::initializer_list<const char*> keys) {
    for (const char* k : keys) {
      if (j.contains(k)) throw ConfigSemanticError(field + "." + k, "not valid for check type '" + type + "'");
    }
  };
  if (type == "quasinonexpansive_wrt") {
    c.kind = CheckSpec::Kind::quasinonexpansive_wrt;
    forbid({"alpha", "beta", "coefficients"});
    c.reference = required(j, "reference", field,
                           [&](const json& v, const std::string& f) { return parse_points(v, dimension, f); });
    if (c.reference.empty()) throw ConfigSemanticError(field + ".reference", "reference set is empty");
  } else if (type == "generalized_hybrid") {
    c.kind = CheckSpec::Kind::generalized_hybrid;
    forbid({"reference", "coefficients"});
    c.gh.alpha = required(j, "alpha", field, get_real);
    c.gh.beta = required(j, "beta", field, get_real);
  } else if (type == "wmgh") {
    c.kind = CheckSpec::Kind::wmgh;
    forbid({"reference", "alpha", "beta"});
    const auto v = required(j, "coefficients", field, [](const json& a, const std::string& f) {
      if (!a.is_array() || a.size() != 7) throw ConfigSemanticError(f, "expected seven coefficients");
      std::vector<double> out;
      for (const json& x : a) out.push_back(get_real(x, f));
      return out;
    });
    c.wmgh = {v[0], v[1], v[2], v[3], v[4], v[5], v[6]};
  } else {
    throw ConfigSemanticError(field + ".type", "unknown check type '" + type + "'");
  }
  if (j.contains("samples")) c.samples = get_count(j["samples"], field + ".samples");
  if (c.samples == 0) throw ConfigSemanticError(field + ".samples", "must be positive");
  if (j.contains("seed")) c.seed = get_seed(j["seed"], field + ".seed");
  if (j.contains("box")) c.box = parse_box(j["box"], field + ".box");
  if (j.contains("expect")) {
    const json& e = j["expect"];
    if (e == "satisfied") {
      c.expect = Expectation::satisfied;
    } else if (e == "violated") {
      c.expect = Expectation::violated;
    } else {
      throw ConfigSemanticError(field + ".expect", "expected 'satisfied' or 'violated'");
    }
  }
  return c;
}

inline std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t column = 1;
  for (std::size_t i = 0; i < std::min(byte > 0 ? byte - 1 : 0, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

}  // namespace detail

/// Builds a validated experiment from its JSON object, filling defaults.
inline ExperimentConfig parse_experiment(const json& j, const std::string& where = "") {
  using namespace detail;
  auto field = [&](const char* k) { return where.empty() ? std::string(k) : where + "." + k; };
  reject_unknown_keys(j, where, {"name", "mapping", "dimension", "generators", "scheme", "checks", "scan", "output",
                                 "tolerances", "max_steps", "projection_max_iter"});
  ExperimentConfig cfg;
  if (j.contains("name")) {
    if (!j["name"].is_string() || j["name"].get<std::string>().empty()) {
      throw ConfigSemanticError(field("name"), "expected a non-empty string");
    }
    cfg.name = j["name"].get<std::string>();
    if (cfg.name.find_first_of("/\\") != std::string::npos || cfg.name == "." || cfg.name == "..") {
      throw ConfigSemanticError(field("name"), "must be a plain directory name");
    }
  }
  if (!j.contains("mapping") || !j["mapping"].is_string()) {
    throw ConfigSemanticError(field("mapping"), "expected a registry name");
  }
  cfg.mapping = j["mapping"].get<std::string>();
  if (j.contains("dimension")) {
    cfg.dimension = get_count(j["dimension"], field("dimension"));
    if (*cfg.dimension == 0) throw ConfigSemanticError(field("dimension"), "must be positive");
  }
  std::size_t d = 0;
  try {
    d = registry_get(cfg.mapping, cfg.dimension).dimension();
  } catch (const Error& e) {
    throw ConfigSemanticError(field("mapping"), e.what());
  }

  if (!j.contains("generators")) throw ConfigSemanticError(field("generators"), "missing");
  const json& g = j["generators"];
  if (g.is_array()) {
    auto pts = parse_points(g, d, field("generators"));
    if (pts.empty()) throw ConfigSemanticError(field("generators"), "generator list is empty");
    cfg.generators = std::move(pts);
  } else {
    reject_unknown_keys(g, field("generators"), {"seed", "count", "box"});
    SamplerSpec s;
    if (g.contains("seed")) s.seed = get_seed(g["seed"], field("generators.seed"));
    s.count = required(g, "count", field("generators"), get_count);
    if (s.count == 0) throw ConfigSemanticError(field("generators.count"), "must be positive");
    if (g.contains("box")) s.box = parse_box(g["box"], field("generators.box"));
    cfg.generators = s;
  }

  bool halpern = false;
  if (j.contains("scheme")) {
    const json& s = j["scheme"];
    reject_unknown_keys(s, field("scheme"), {"halpern", "mann"});
    if (s.size() != 1) throw ConfigSemanticError(field("scheme"), "expected exactly one of 'halpern' or 'mann'");
    if (s.contains("halpern")) {
      const json& h = s["halpern"];
      const std::string f = field("scheme.halpern");
      reject_unknown_keys(h, f, {"u", "x1", "alpha", "beta"});
      auto pt = [d](const json& v, const std::string& ff) { return parse_point(v, d, ff); };
      cfg.scheme = HalpernSpec{required(h, "u", f, pt), required(h, "x1", f, pt),
                               required(h, "alpha", f, parse_schedule), required(h, "beta", f, parse_schedule)};
      halpern = true;
    } else {
      const json& m = s["mann"];
      const std::string f = field("scheme.mann");
      reject_unknown_keys(m, f, {"x1", "alpha"});
      cfg.scheme = MannSpec{required(m, "x1", f, [d](const json& v, const std::string& ff) { return parse_point(v, d, ff); }),
                            required(m, "alpha", f, parse_schedule)};
    }
  }

  if (j.contains("checks")) {
    const json& cs = j["checks"];
    if (!cs.is_array()) throw ConfigSemanticError(field("checks"), "expected an array");
    for (std::size_t i = 0; i < cs.size(); ++i) {
      cfg.checks.push_back(parse_check(cs[i], d, field("checks") + "[" + std::to_string(i) + "]"));
    }
  }

  if (j.contains("scan")) {
    const json& s = j["scan"];
    reject_unknown_keys(s, field("scan"), {"lo", "hi", "step"});
    ScanSpec scan;
    if (s.contains("lo")) scan.lo = get_real(s["lo"], field("scan.lo"));
    if (s.contains("hi")) scan.hi = get_real(s["hi"], field("scan.hi"));
    if (s.contains("step")) scan.step = get_real(s["step"], field("scan.step"));
    if (!(scan.step > 0.0) || !(scan.hi >= scan.lo)) throw ConfigSemanticError(field("scan"), "invalid grid bounds");
    cfg.scan = scan;
  }

  if (j.contains("output")) {
    if (!j["output"].is_string()) throw ConfigSemanticError(field("output"), "expected a path string");
    cfg.output = j["output"].get<std::string>();
  }

  cfg.tolerances.stop_tol = halpern ? kHalpernStopTol : kMannStopTol;
  if (j.contains("tolerances")) {
    const json& t = j["tolerances"];
    const std::string f = field("tolerances");
    reject_unknown_keys(t, f, {"class_tol", "stop_tol", "projection_tol", "scan_tol", "member_tol", "vacuous_threshold"});
    auto set = [&](const char* key, double& slot) {
      if (!t.contains(key)) return;
      slot = get_real(t[key], f + "." + key);
      if (!(slot >= 0.0)) throw ConfigSemanticError(f + "." + key, "must be non-negative");
    };
    set("class_tol", cfg.tolerances.class_tol);
    set("stop_tol", cfg.tolerances.stop_tol);
    set("projection_tol", cfg.tolerances.projection_tol);
    set("scan_tol", cfg.tolerances.scan_tol);
    set("member_tol", cfg.tolerances.member_tol);
    set("vacuous_threshold", cfg.tolerances.vacuous_threshold);
  }
  if (j.contains("max_steps")) cfg.max_steps = get_count(j["max_steps"], field("max_steps"));
  if (j.contains("projection_max_iter")) {
    cfg.projection_max_iter = get_count(j["projection_max_iter"], field("projection_max_iter"));
  }
  return cfg;
}

/// Parses a batch: either `{"experiments": [...]}` or a single experiment object.
/// Unnamed experiments are called `experiment_<index>`.
inline std::vector<ExperimentConfig> parse_config(const json& j) {
  std::vector<ExperimentConfig> out;
  if (j.is_object() && j.contains("experiments")) {
    detail::reject_unknown_keys(j, "", {"experiments"});
    const json& list = j["experiments"];
    if (!list.is_array() || list.empty()) throw ConfigSemanticError("experiments", "expected a non-empty array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      out.push_back(parse_experiment(list[i], "experiments[" + std::to_string(i) + "]"));
    }
  } else {
    out.push_back(parse_experiment(j));
  }
  std::set<std::string> names;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i].name.empty()) out[i].name = "experiment_" + std::to_string(i);
    if (!names.insert(out[i].name).second) throw ConfigSemanticError("name", "duplicate experiment name '" + out[i].name + "'");
  }
  return out;
}

inline std::vector<ExperimentConfig> parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, column] = detail::line_column(text, e.byte);
    throw ConfigSyntaxError(e.what(), line, column);
  }
  return parse_config(j);
}

inline std::vector<ExperimentConfig> load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigSemanticError("path", "cannot open '" + path.string() + "'");
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_config_text(text);
}

// ---------------------------------------------------------------------------
// Serialisation (inverse of parse_experiment)

inline json to_json(const Schedule& s) {
  switch (s.family()) {
    case Schedule::Family::constant:
      return {{"constant", s.value()}};
    case Schedule::Family::power:
      return {{"power", {{"scale", s.scale()}, {"exponent", s.exponent()}, {"shift", s.shift()}}}};
    case Schedule::Family::custom:
      break;
  }
  throw ConfigSemanticError("schedule", "custom schedules have no config form");
}

inline json to_json(const CheckSpec& c) {
  json j;
  switch (c.kind) {
    case CheckSpec::Kind::quasinonexpansive_wrt: {
      j["type"] = "quasinonexpansive_wrt";
      json ref = json::array();
      for (const Vector& z : c.reference) ref.push_back(to_json(z));
      j["reference"] = std::move(ref);
      break;
    }
    case CheckSpec::Kind::generalized_hybrid:
      j["type"] = "generalized_hybrid";
      j["alpha"] = c.gh.alpha;
      j["beta"] = c.gh.beta;
      break;
    case CheckSpec::Kind::wmgh:
      j["type"] = "wmgh";
      j["coefficients"] = {c.wmgh.alpha, c.wmgh.beta,    c.wmgh.gamma, c.wmgh.delta,
                           c.wmgh.epsilon, c.wmgh.zeta, c.wmgh.eta};
      break;
  }
  j["samples"] = c.samples;
  j["seed"] = c.seed;
  j["box"] = {c.box.lo, c.box.hi};
  j["expect"] = c.expect == Expectation::satisfied ? "satisfied" : "violated";
  return j;
}

inline json to_json(const ExperimentConfig& cfg) {
  json j;
  j["name"] = cfg.name;
  j["mapping"] = cfg.mapping;
  if (cfg.dimension) j["dimension"] = *cfg.dimension;
  if (const auto* pts = std::get_if<std::vector<Vector>>(&cfg.generators)) {
    json g = json::array();
    for (const Vector& p : *pts) g.push_back(to_json(p));
    j["generators"] = std::move(g);
  } else {
    const auto& s = std::get<SamplerSpec>(cfg.generators);
    j["generators"] = {{"seed", s.seed}, {"count", s.count}, {"box", {s.box.lo, s.box.hi}}};
  }
  if (cfg.scheme) {
    if (const auto* h = std::get_if<HalpernSpec>(&*cfg.scheme)) {
      j["scheme"] = {{"halpern",
                      {{"u", to_json(h->u)}, {"x1", to_json(h->x1)}, {"alpha", to_json(h->alpha)}, {"beta", to_json(h->beta)}}}};
    } else {
      const auto& m = std::get<MannSpec>(*cfg.scheme);
      j["scheme"] = {{"mann", {{"x1", to_json(m.x1)}, {"alpha", to_json(m.alpha)}}}};
    }
  }
  json checks = json::array();
  for (const CheckSpec& c : cfg.checks) checks.push_back(to_json(c));
  j["checks"] = std::move(checks);
  if (cfg.scan) j["scan"] = {{"lo", cfg.scan->lo}, {"hi", cfg.scan->hi}, {"step", cfg.scan->step}};
  j["output"] = cfg.output;
  const Tolerances& t = cfg.tolerances;
  j["tolerances"] = {{"class_tol", t.class_tol},     {"stop_tol", t.stop_tol},     {"projection_tol", t.projection_tol},
                     {"scan_tol", t.scan_tol},       {"member_tol", t.member_tol}, {"vacuous_threshold", t.vacuous_threshold}};
  j["max_steps"] = cfg.max_steps;
  j["projection_max_iter"] = cfg.projection_max_iter;
  return j;
}

/// Replaces every seed in the batch (generator sampler and class checks).
inline void override_seeds(std::vector<ExperimentConfig>& batch, std::uint64_t seed) {
  for (ExperimentConfig& cfg : batch) {
    if (auto* s = std::get_if<SamplerSpec>(&cfg.generators)) s->seed = seed;
    for (CheckSpec& c : cfg.checks) c.seed = seed;
  }
}

// ---------------------------------------------------------------------------
// Running

enum class RunMode { full, scan_only, check_only };

/// Ordered by severity; a batch reports the worst status of its experiments.
enum class RunStatus { ok = 0, verdict_failure = 1, config_error = 2, numerical_divergence = 3 };

inline RunStatus worse(RunStatus a, RunStatus b) {
  auto rank = [](RunStatus s) {
    switch (s) {
      case RunStatus::ok:
        return 0;
      case RunStatus::verdict_failure:
        return 1;
      case RunStatus::numerical_divergence:
        return 2;
      case RunStatus::config_error:
        return 3;
    }
    return 0;
  };
  return rank(a) >= rank(b) ? a : b;
}

struct ExperimentResult {
  std::string name;
  json report;
  std::optional<HalfspaceSet> attractor;
  std::optional<IterationTrace> trace;
  RunStatus status = RunStatus::ok;
};

namespace detail {

inline json check_report(const ExperimentConfig& cfg, const MappingSpec& T, const CheckSpec& c, bool& passed) {
  ClassVerdict v;
  json j = to_json(c);
  const SearchOptions opts{c.samples, c.seed, cfg.tolerances.class_tol, c.box};
  switch (c.kind) {
    case CheckSpec::Kind::quasinonexpansive_wrt:
      v = check_quasinonexpansive_wrt(T, c.reference, c.samples, c.seed, cfg.tolerances.class_tol, c.box);
      break;
    case CheckSpec::Kind::generalized_hybrid:
      v = check_generalized_hybrid(T, c.gh, opts);
      break;
    case CheckSpec::Kind::wmgh:
      v = check_wmgh(T, c.wmgh, opts);
      j["condition_A"] = wmgh_condition_A(c.wmgh);
      j["condition_B"] = wmgh_condition_B(c.wmgh);
      break;
  }
  passed = v.satisfied == (c.expect == Expectation::satisfied);
  j["verdict"] = to_json(v);
  j["passed"] = passed;
  return j;
}

inline std::vector<Vector> resolve_generators(const ExperimentConfig& cfg, const MappingSpec& T) {
  if (const auto* pts = std::get_if<std::vector<Vector>>(&cfg.generators)) return *pts;
  const auto& s = std::get<SamplerSpec>(cfg.generators);
  return T.domain.sample(s.seed, s.count, s.box);
}

}  // namespace detail

/// Runs one experiment in memory. Module errors are recorded in the report
/// rather than thrown.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg, RunMode mode = RunMode::full) {
  const auto started = std::chrono::steady_clock::now();
  ExperimentResult result;
  result.name = cfg.name;
  json& report = result.report;
  report["name"] = cfg.name;
  report["mapping"] = cfg.mapping;
  report["errors"] = json::array();
  auto fail = [&](RunStatus s, const std::string& stage, const std::string& what) {
    result.status = worse(result.status, s);
    report["errors"].push_back({{"stage", stage}, {"message", what}});
  };

  std::optional<MappingSpec> T;
  try {
    T = registry_get(cfg.mapping, cfg.dimension);
  } catch (const Error& e) {
    fail(RunStatus::config_error, "mapping", e.what());
  }

  if (T && mode != RunMode::scan_only) {
    json checks = json::array();
    for (const CheckSpec& c : cfg.checks) {
      try {
        bool passed = false;
        checks.push_back(detail::check_report(cfg, *T, c, passed));
        if (!passed) result.status = worse(result.status, RunStatus::verdict_failure);
      } catch (const Error& e) {
        fail(RunStatus::verdict_failure, "check", e.what());
      }
    }
    report["checks"] = std::move(checks);
  }

  std::optional<ExtensionMapping> ext;
  if (T && mode != RunMode::check_only) {
    try {
      const auto generators = detail::resolve_generators(cfg, *T);
      HalfspaceSet S = build_attractor(*T, generators, cfg.tolerances.vacuous_threshold);
      report["attractor"] = {{"constraint_count", S.size()}, {"generator_count", generators.size()}};
      result.attractor = S;
      ext.emplace(*T, std::move(S), ProjectionParams{cfg.projection_max_iter, cfg.tolerances.projection_tol});
    } catch (const Error& e) {
      fail(RunStatus::verdict_failure, "attractor", e.what());
    }
  }

  if (ext && cfg.scan && mode != RunMode::check_only) {
    try {
      const auto grid = lattice_points(ext->dimension(), cfg.scan->lo, cfg.scan->hi, cfg.scan->step);
      const auto fixed = scan_fixed_points(*ext, grid, cfg.tolerances.scan_tol);
      json pts = json::array();
      for (const Vector& p : fixed) pts.push_back(to_json(p));
      report["scan"] = {{"grid_points", grid.size()}, {"fixed_points", std::move(pts)}};
    } catch (const Error& e) {
      fail(RunStatus::verdict_failure, "scan", e.what());
    }
  } else if (mode == RunMode::scan_only && !cfg.scan) {
    fail(RunStatus::config_error, "scan", "no scan grid configured");
  }

  if (ext && cfg.scheme && mode == RunMode::full) {
    try {
      IterationTrace trace;
      json it;
      if (const auto* h = std::get_if<HalpernSpec>(&*cfg.scheme)) {
        trace = run_halpern(*ext, h->u, h->x1, h->alpha, h->beta, cfg.max_steps, cfg.tolerances.stop_tol);
        it["scheme"] = "halpern";
        it["anchor"] = to_json(h->u);
      } else {
        const auto& m = std::get<MannSpec>(*cfg.scheme);
        trace = run_mann(*ext, m.x1, m.alpha, cfg.max_steps, cfg.tolerances.stop_tol);
        it["scheme"] = "mann";
      }
      it["schedule_diagnostics"] = to_json(trace.diagnostics);
      it["schedules_valid"] = all_pass(trace.diagnostics);
      it["converged"] = trace.verdict.converged;
      it["reason"] = trace.verdict.reason;
      it["note"] = trace.note;
      it["steps"] = trace.step_norms.size();
      it["final_iterate"] = to_json(trace.last());
      it["final_residual"] = trace.residuals.back();
      it["limit"] = trace.verdict.limit ? to_json(*trace.verdict.limit) : json(nullptr);
      it["member_of_attractor"] = member(ext->attractor(), trace.last(), cfg.tolerances.member_tol);
      it["residual_limit_check"] = residual_limit_check(trace, ext->attractor(), cfg.tolerances.member_tol);
      if (!trace.verdict.converged) result.status = worse(result.status, RunStatus::verdict_failure);
      report["iteration"] = std::move(it);
      result.trace = std::move(trace);
    } catch (const NumericalDivergence& e) {
      report["iteration"] = {{"converged", false}, {"reason", e.what()}, {"divergence_step", e.step()}};
      fail(RunStatus::numerical_divergence, "iteration", e.what());
    } catch (const Error& e) {
      fail(RunStatus::verdict_failure, "iteration", e.what());
    }
  }

  report["status"] = static_cast<int>(result.status);
  report["wall_time_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << text;
}

/// Writes <outdir>/<name>/{trace.csv, attractor.json, report.json}.
inline void write_artifacts(const ExperimentResult& r, const std::filesystem::path& outdir) {
  const auto dir = outdir / r.name;
  std::filesystem::create_directories(dir);
  if (r.trace) write_text(dir / "trace.csv", trace_csv(*r.trace));
  if (r.attractor) write_text(dir / "attractor.json", to_json(*r.attractor).dump(2) + "\n");
  write_text(dir / "report.json", r.report.dump(2) + "\n");
}

/// Runs a batch with up to `jobs` worker threads; results keep config order.
inline std::vector<ExperimentResult> run_batch(const std::vector<ExperimentConfig>& batch, RunMode mode,
                                               unsigned jobs = 1) {
  std::vector<ExperimentResult> results(batch.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < batch.size(); i = next++) results[i] = run_experiment(batch[i], mode);
  };
  const unsigned n = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(batch.size())));
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
    worker();
  }
  return results;
}

inline RunStatus batch_status(const std::vector<ExperimentResult>& results) {
  RunStatus s = RunStatus::ok;
  for (const auto& r : results) s = worse(s, r.status);
  return s;
}

inline json summary_json(const std::vector<ExperimentResult>& results) {
  json list = json::array();
  for (const auto& r : results) list.push_back(r.report);
  return {{"experiments", std::move(list)}, {"status", static_cast<int>(batch_status(results))}};
}

}  // namespace attractor
