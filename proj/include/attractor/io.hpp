#pragma once

#include <cstdio>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "attractor/attractive.hpp"
#include "attractor/classes.hpp"
#include "attractor/iterate.hpp"

namespace attractor {

using json = nlohmann::json;

inline json to_json(const Vector& v) { return json(std::vector<double>(v.coords().begin(), v.coords().end())); }

/// {dimension, constraints: [{a: [...], b}], generators: [[...]]}
inline json to_json(const HalfspaceSet& S) {
  json constraints = json::array();
  for (const Halfspace& h : S.constraints) constraints.push_back({{"a", to_json(h.a)}, {"b", h.b}});
  json generators = json::array();
  for (const Vector& g : S.generators) generators.push_back(to_json(g));
  return {{"dimension", S.dimension}, {"constraints", std::move(constraints)}, {"generators", std::move(generators)}};
}

inline HalfspaceSet halfspace_set_from_json(const json& j) {
  HalfspaceSet S;
  S.dimension = j.at("dimension").get<std::size_t>();
  for (const json& c : j.at("constraints")) {
    Vector a(c.at("a").get<std::vector<double>>());
    if (a.dimension() != S.dimension) throw DimensionError(S.dimension, a.dimension());
    S.constraints.emplace_back(std::move(a), c.at("b").get<double>());
  }
  for (const json& g : j.at("generators")) S.generators.emplace_back(g.get<std::vector<double>>());
  return S;
}

inline json to_json(const ClassVerdict& v) {
  json j = {{"satisfied", v.satisfied},
            {"max_violation", v.max_violation},
            {"samples_checked", v.samples_checked}};
  if (v.witness) {
    j["witness"] = {to_json(v.witness->first), to_json(v.witness->second)};
  } else {
    j["witness"] = nullptr;
  }
  return j;
}

inline json to_json(const std::vector<ScheduleDiagnostic>& diags) {
  json out = json::array();
  for (const auto& d : diags) {
    out.push_back({{"condition", d.condition},
                   {"status", to_string(d.status)},
                   {"reason", d.reason},
                   {"derived", d.derived}});
  }
  return out;
}

/// Fixed 17 significant digits.
inline std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Columns: n, x_1..x_d, residual, step_norm, alpha_n, beta_n.
/// The last row has no outgoing step, so its step and weight fields are empty;
/// Mann traces leave beta_n empty throughout.
inline void write_trace_csv(std::ostream& os, const IterationTrace& trace) {
  const std::size_t d = trace.iterates.empty() ? 0 : trace.iterates.front().dimension();
  os << "n";
  for (std::size_t i = 1; i <= d; ++i) os << ",x_" << i;
  os << ",residual,step_norm,alpha_n,beta_n\n";
  for (std::size_t k = 0; k < trace.iterates.size(); ++k) {
    os << (k + 1);
    for (double c : trace.iterates[k].coords()) os << ',' << format_real(c);
    os << ',' << format_real(trace.residuals[k]) << ',';
    if (k < trace.step_norms.size()) {
      const auto& [a, b] = trace.schedule_values[k];
      os << format_real(trace.step_norms[k]) << ',' << format_real(a) << ',';
      if (b) os << format_real(*b);
    } else {
      os << ",,";
    }
    os << '\n';
  }
}

inline std::string trace_csv(const IterationTrace& trace) {
  std::ostringstream os;
  write_trace_csv(os, trace);
  return os.str();
}

}  // namespace attractor
