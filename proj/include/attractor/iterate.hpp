#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "attractor/attractive.hpp"
#include "attractor/errors.hpp"
#include "attractor/space.hpp"

namespace attractor {

/// Step-size sequence n -> a_n for n >= 1.
///
/// Only the closed families `power` (a (n + n0)^-theta) and `constant` are
/// decided by the validators; `custom` sequences run but are reported as
/// undecidable.
class Schedule {
 public:
  enum class Family { power, constant, custom };

  static Schedule power(double scale, double exponent, double shift = 0.0) {
    Schedule s(Family::power);
    s.scale_ = scale;
    s.exponent_ = exponent;
    s.shift_ = shift;
    return s;
  }
  static Schedule constant(double value) {
    Schedule s(Family::constant);
    s.scale_ = value;
    return s;
  }
  static Schedule custom(std::function<double(std::size_t)> fn, std::string label) {
    Schedule s(Family::custom);
    s.fn_ = std::move(fn);
    s.label_ = std::move(label);
    return s;
  }

  double operator()(std::size_t n) const {
    switch (family_) {
      case Family::power:
        return scale_ * std::pow(static_cast<double>(n) + shift_, -exponent_);
      case Family::constant:
        return scale_;
      case Family::custom:
        return fn_(n);
    }
    return 0.0;
  }

  Family family() const noexcept { return family_; }
  double scale() const noexcept { return scale_; }
  double value() const noexcept { return scale_; }
  double exponent() const noexcept { return exponent_; }
  double shift() const noexcept { return shift_; }
  const std::string& label() const noexcept { return label_; }

  std::string describe() const {
    switch (family_) {
      case Family::power:
        return "power(scale=" + std::to_string(scale_) + ", exponent=" + std::to_string(exponent_) +
               ", shift=" + std::to_string(shift_) + ")";
      case Family::constant:
        return "constant(" + std::to_string(scale_) + ")";
      case Family::custom:
        return "custom(" + label_ + ")";
    }
    return {};
  }

  friend bool operator==(const Schedule& a, const Schedule& b) {
    if (a.family_ != b.family_) return false;
    if (a.family_ == Family::custom) return a.label_ == b.label_;
    return a.scale_ == b.scale_ && a.exponent_ == b.exponent_ && a.shift_ == b.shift_;
  }

 private:
  explicit Schedule(Family f) : family_(f) {}

  Family family_;
  double scale_ = 0.0;
  double exponent_ = 0.0;
  double shift_ = 0.0;
  std::function<double(std::size_t)> fn_;
  std::string label_;
};

enum class DiagnosticStatus { pass, fail, undecidable };

inline const char* to_string(DiagnosticStatus s) {
  switch (s) {
    case DiagnosticStatus::pass:
      return "pass";
    case DiagnosticStatus::fail:
      return "fail";
    case DiagnosticStatus::undecidable:
      return "undecidable";
  }
  return "?";
}

struct ScheduleDiagnostic {
  std::string condition;
  DiagnosticStatus status = DiagnosticStatus::pass;
  std::string reason;
  bool derived = false;  // restatement of another condition, reported for information
};

inline bool all_pass(const std::vector<ScheduleDiagnostic>& diags) {
  for (const auto& d : diags) {
    if (d.status != DiagnosticStatus::pass) return false;
  }
  return true;
}

namespace detail {

inline ScheduleDiagnostic diag(std::string condition, bool ok, std::string reason, bool derived = false) {
  return {std::move(condition), ok ? DiagnosticStatus::pass : DiagnosticStatus::fail, std::move(reason), derived};
}

inline ScheduleDiagnostic undecidable(std::string condition, const Schedule& s) {
  return {std::move(condition), DiagnosticStatus::undecidable,
          "tail condition cannot be decided from finitely many terms of " + s.describe(), false};
}

/// power schedules are valid in (0, 1] when 0 < scale <= 1, exponent > 0 and
/// n + shift >= 1 for n >= 1.
inline bool power_in_unit_interval(const Schedule& s) {
  return s.scale() > 0.0 && s.scale() <= 1.0 && s.exponent() > 0.0 && s.shift() >= 0.0;
}

/// liminf s_n (1 - s_n) > 0, for a Mann or Halpern inner weight.
inline ScheduleDiagnostic liminf_product(const std::string& name, const Schedule& s) {
  const std::string cond = "liminf " + name + "_n(1-" + name + "_n) > 0";
  switch (s.family()) {
    case Schedule::Family::constant: {
      const double c = s.value();
      return diag(cond, c > 0.0 && c < 1.0,
                  "constant " + name + " = " + std::to_string(c) + " gives " + name + "(1-" + name +
                      ") = " + std::to_string(c * (1.0 - c)));
    }
    case Schedule::Family::power:
      return diag(cond, false, name + "_n -> 0, so " + name + "_n(1-" + name + "_n) -> 0");
    case Schedule::Family::custom:
      break;
  }
  return undecidable(cond, s);
}

inline std::optional<ScheduleDiagnostic> liminf_limsup_restatement(const std::string& name, const Schedule& s) {
  if (s.family() != Schedule::Family::constant) return std::nullopt;
  const double c = s.value();
  return diag("liminf " + name + "_n > 0 and limsup " + name + "_n < 1", c > 0.0 && c < 1.0,
              "both limits equal " + std::to_string(c), true);
}

}  // namespace detail

/// Conditions on the Halpern weights: alpha_n in (0,1], alpha_n -> 0,
/// sum alpha_n = inf, beta_n in [0,1], liminf beta_n(1 - beta_n) > 0.
inline std::vector<ScheduleDiagnostic> validate_halpern_schedules(const Schedule& alpha, const Schedule& beta) {
  using F = Schedule::Family;
  std::vector<ScheduleDiagnostic> out;

  switch (alpha.family()) {
    case F::power: {
      out.push_back(detail::diag("alpha_n in (0,1]", detail::power_in_unit_interval(alpha),
                                 "needs 0 < scale <= 1, exponent > 0, shift >= 0"));
      out.push_back(detail::diag("alpha_n -> 0", alpha.exponent() > 0.0, "power decay with exponent " +
                                                                             std::to_string(alpha.exponent())));
      out.push_back(detail::diag("sum alpha_n = inf", alpha.exponent() <= 1.0,
                                 "p-series with exponent " + std::to_string(alpha.exponent()) +
                                     (alpha.exponent() <= 1.0 ? " diverges" : " converges")));
      break;
    }
    case F::constant: {
      const double c = alpha.value();
      out.push_back(detail::diag("alpha_n in (0,1]", c > 0.0 && c <= 1.0, "constant " + std::to_string(c)));
      out.push_back(detail::diag("alpha_n -> 0", false, "constant sequence does not vanish"));
      out.push_back(detail::diag("sum alpha_n = inf", c > 0.0, "constant series"));
      break;
    }
    case F::custom:
      out.push_back(detail::undecidable("alpha_n in (0,1]", alpha));
      out.push_back(detail::undecidable("alpha_n -> 0", alpha));
      out.push_back(detail::undecidable("sum alpha_n = inf", alpha));
      break;
  }

  switch (beta.family()) {
    case F::power:
      out.push_back(detail::diag("beta_n in [0,1]", detail::power_in_unit_interval(beta),
                                 "needs 0 < scale <= 1, exponent > 0, shift >= 0"));
      break;
    case F::constant:
      out.push_back(detail::diag("beta_n in [0,1]", beta.value() >= 0.0 && beta.value() <= 1.0,
                                 "constant " + std::to_string(beta.value())));
      break;
    case F::custom:
      out.push_back(detail::undecidable("beta_n in [0,1]", beta));
      break;
  }
  out.push_back(detail::liminf_product("beta", beta));
  if (auto r = detail::liminf_limsup_restatement("beta", beta)) out.push_back(std::move(*r));
  return out;
}

/// Conditions on the Mann weight: alpha_n in [0,1], liminf alpha_n(1 - alpha_n) > 0.
inline std::vector<ScheduleDiagnostic> validate_mann_schedule(const Schedule& alpha) {
  std::vector<ScheduleDiagnostic> out;
  switch (alpha.family()) {
    case Schedule::Family::power:
      out.push_back(detail::diag("alpha_n in [0,1]", detail::power_in_unit_interval(alpha),
                                 "needs 0 < scale <= 1, exponent > 0, shift >= 0"));
      break;
    case Schedule::Family::constant:
      out.push_back(detail::diag("alpha_n in [0,1]", alpha.value() >= 0.0 && alpha.value() <= 1.0,
                                 "constant " + std::to_string(alpha.value())));
      break;
    case Schedule::Family::custom:
      out.push_back(detail::undecidable("alpha_n in [0,1]", alpha));
      break;
  }
  out.push_back(detail::liminf_product("alpha", alpha));
  if (auto r = detail::liminf_limsup_restatement("alpha", alpha)) out.push_back(std::move(*r));
  return out;
}

// ---------------------------------------------------------------------------

enum class Scheme { halpern, mann };

struct IterationVerdict {
  bool converged = false;
  std::optional<Vector> limit;
  std::string reason;
};

/// Record of a run. `iterates[k]` is x_{k+1}; `residuals[k]` = |x_{k+1} - T̃x_{k+1}|;
/// `step_norms[k]` = |x_{k+2} - x_{k+1}| and `schedule_values[k]` holds the
/// weights used to produce x_{k+2}. Mann runs leave the beta slot empty.
struct IterationTrace {
  Scheme scheme = Scheme::mann;
  std::vector<Vector> iterates;
  std::vector<double> residuals;
  std::vector<double> step_norms;
  std::vector<std::pair<double, std::optional<double>>> schedule_values;
  std::optional<Vector> anchor;
  std::vector<ScheduleDiagnostic> diagnostics;
  IterationVerdict verdict;
  std::string note;

  std::size_t size() const noexcept { return iterates.size(); }
  const Vector& last() const { return iterates.back(); }
};

inline constexpr std::size_t kDefaultMaxSteps = 200'000;
inline constexpr double kHalpernStopTol = 1e-6;
inline constexpr double kMannStopTol = 1e-10;

namespace detail {

/// Shared driver: `update(n, x, Tx)` produces x_{n+1} and records the weights.
template <typename Update>
IterationTrace run_scheme(IterationTrace trace, const ExtensionMapping& ext, const Vector& x1,
                          std::size_t max_steps, double stop_tol, Update&& update) {
  if (x1.dimension() != ext.dimension()) throw DimensionError(ext.dimension(), x1.dimension());
  Vector x = x1;
  Vector Tx = ext(x);
  trace.iterates.push_back(x);
  trace.residuals.push_back(distance(x, Tx));

  auto diverge = [&](std::size_t n) {
    trace.verdict = {false, std::nullopt, "non-finite iterate at step " + std::to_string(n)};
    throw NumericalDivergence(n, std::make_shared<const IterationTrace>(std::move(trace)));
  };

  for (std::size_t n = 1; n <= max_steps; ++n) {
    auto [next, weights] = update(n, x, Tx);
    if (!next.is_finite()) diverge(n);
    const double step = distance(next, x);
    Vector Tnext = ext(next);
    if (!Tnext.is_finite()) diverge(n);
    const double residual = distance(next, Tnext);

    trace.step_norms.push_back(step);
    trace.schedule_values.push_back(weights);
    trace.iterates.push_back(next);
    trace.residuals.push_back(residual);
    x = std::move(next);
    Tx = std::move(Tnext);

    if (step < stop_tol && residual < stop_tol) {
      trace.verdict = {true, x, "step norm and residual below " + std::to_string(stop_tol) + " after " +
                                    std::to_string(n) + " steps"};
      return trace;
    }
  }
  trace.verdict = {false, std::nullopt, "step budget of " + std::to_string(max_steps) + " exhausted"};
  return trace;
}

}  // namespace detail

/// x_{n+1} = alpha_n u + (1 - alpha_n)[beta_n x_n + (1 - beta_n) T̃x_n].
///
/// Invalid schedules are recorded in `diagnostics`; the run still executes.
inline IterationTrace run_halpern(const ExtensionMapping& ext, const Vector& u, const Vector& x1,
                                  const Schedule& alpha, const Schedule& beta,
                                  std::size_t max_steps = kDefaultMaxSteps, double stop_tol = kHalpernStopTol) {
  if (u.dimension() != ext.dimension()) throw DimensionError(ext.dimension(), u.dimension());
  IterationTrace trace;
  trace.scheme = Scheme::halpern;
  trace.anchor = u;
  trace.diagnostics = validate_halpern_schedules(alpha, beta);
  trace.note = "strong convergence to the projection of the anchor onto A(T) is expected";
  return detail::run_scheme(std::move(trace), ext, x1, max_steps, stop_tol,
                            [&](std::size_t n, const Vector& x, const Vector& Tx) {
                              const double a = alpha(n);
                              const double b = beta(n);
                              Vector inner_step = Vector::lincomb(b, x, 1.0 - b, Tx);
                              Vector next = Vector::lincomb(a, u, 1.0 - a, inner_step);
                              return std::pair{std::move(next), std::pair{a, std::optional<double>(b)}};
                            });
}

/// x_{n+1} = alpha_n x_n + (1 - alpha_n) T̃x_n.
///
/// In finite dimension weak convergence is ordinary convergence, so the
/// verdict is the norm limit of the iterates.
inline IterationTrace run_mann(const ExtensionMapping& ext, const Vector& x1, const Schedule& alpha,
                               std::size_t max_steps = kDefaultMaxSteps, double stop_tol = kMannStopTol) {
  IterationTrace trace;
  trace.scheme = Scheme::mann;
  trace.diagnostics = validate_mann_schedule(alpha);
  trace.note = "weak convergence read as norm convergence (finite dimension)";
  trace = detail::run_scheme(std::move(trace), ext, x1, max_steps, stop_tol,
                             [&](std::size_t n, const Vector& x, const Vector& Tx) {
                               const double a = alpha(n);
                               Vector next = Vector::lincomb(a, x, 1.0 - a, Tx);
                               return std::pair{std::move(next), std::pair{a, std::optional<double>()}};
                             });
  if (trace.verdict.converged && !member(ext.attractor(), *trace.verdict.limit, 1e-9)) {
    trace.note += "; limit lies outside the attractor approximation";
  }
  return trace;
}

/// Finite-dimensional surrogate for demiclosedness: a converged run's limit
/// must lie in the attractor.
inline bool residual_limit_check(const IterationTrace& trace, const HalfspaceSet& S, double tol = 1e-9) {
  if (!trace.verdict.converged || !trace.verdict.limit) return false;
  return member(S, *trace.verdict.limit, tol);
}

}  // namespace attractor
