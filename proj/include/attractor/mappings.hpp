#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "attractor/errors.hpp"
#include "attractor/space.hpp"

namespace attractor {

/// Coefficients (alpha, beta) of the generalized hybrid inequality
///   alpha|Tx-Ty|^2 + (1-alpha)|x-Ty|^2 <= beta|Tx-y|^2 + (1-beta)|x-y|^2.
struct GHCoefficients {
  double alpha = 1.0;
  double beta = 0.0;

  friend bool operator==(const GHCoefficients&, const GHCoefficients&) = default;
};

/// Seven coefficients of the widely more generalized hybrid inequality
///   alpha|Tx-Ty|^2 + beta|x-Ty|^2 + gamma|Tx-y|^2 + delta|x-y|^2
///   + epsilon|x-Tx|^2 + zeta|y-Ty|^2 + eta|x-Tx-(y-Ty)|^2 <= 0.
struct WMGHCoefficients {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  double delta = 0.0;
  double epsilon = 0.0;
  double zeta = 0.0;
  double eta = 0.0;

  friend bool operator==(const WMGHCoefficients&, const WMGHCoefficients&) = default;
};

struct Quasinonexpansive {
  friend bool operator==(const Quasinonexpansive&, const Quasinonexpansive&) = default;
};

/// Unverified class metadata attached to a mapping.
using ClassTag = std::variant<Quasinonexpansive, GHCoefficients, WMGHCoefficients>;

/// A mapping T: C -> H.
struct MappingSpec {
  DomainSpec domain;
  std::function<Vector(const Vector&)> evaluate;
  std::string name;
  std::vector<ClassTag> declared_classes;

  std::size_t dimension() const noexcept { return domain.dimension; }
};

/// Tx, rejecting points outside C.
inline Vector eval(const MappingSpec& T, const Vector& x) {
  if (x.dimension() != T.domain.dimension) throw DimensionError(T.domain.dimension, x.dimension());
  if (!T.domain.membership(x)) {
    throw DomainViolation(T.name, std::vector<double>(x.coords().begin(), x.coords().end()));
  }
  return T.evaluate(x);
}

// ---------------------------------------------------------------------------
// Concrete mappings

/// H = R, C = R \ {0}; Tx = 1 at x = 1 and -x elsewhere.
/// F(T) = {1} while A(T) = {0}.
inline MappingSpec paper_example() {
  auto nonzero = [](const Vector& x) { return x[0] != 0.0; };
  DomainSpec domain{1, nonzero, box_sampler(1, nonzero, 1.0 / 64.0), false, true};
  auto T = [](const Vector& x) {
    // exact comparison: the branch is only taken at the representable point 1
    return x[0] == 1.0 ? Vector{1.0} : Vector{-x[0]};
  };
  return MappingSpec{std::move(domain), T, "paper_example", {}};
}

inline MappingSpec negation(std::size_t dimension) {
  return MappingSpec{whole_space(dimension),
                     [](const Vector& x) { return -x; },
                     "negation_d(" + std::to_string(dimension) + ")",
                     {Quasinonexpansive{}, GHCoefficients{1.0, 0.0}}};
}

inline MappingSpec rotation_2d(double theta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  auto T = [c, s](const Vector& x) { return Vector{c * x[0] - s * x[1], s * x[0] + c * x[1]}; };
  return MappingSpec{whole_space(2), T, "rotation_2d(" + std::to_string(theta) + ")",
                     {Quasinonexpansive{}, GHCoefficients{1.0, 0.0}}};
}

/// Tx = p + c(x - p) with 0 <= c < 1.
inline MappingSpec contraction(double factor, Vector center) {
  if (!(factor >= 0.0 && factor < 1.0)) throw UnknownMapping("contraction", "contraction factor must lie in [0, 1)");
  const std::size_t d = center.dimension();
  // p + c(x - p) keeps Tp == p bit for bit
  auto T = [factor, center](const Vector& x) { return center + factor * (x - center); };
  return MappingSpec{whole_space(d), T, "contraction(" + std::to_string(factor) + ")",
                     {Quasinonexpansive{}, GHCoefficients{1.0, 0.0}}};
}

/// Metric projection of R^d onto the closed ball of radius r about the origin.
inline MappingSpec ball_projection(double radius, std::size_t dimension) {
  if (!(radius > 0.0)) throw UnknownMapping("ball_projection", "radius must be positive");
  auto T = [radius](const Vector& x) {
    const double n = norm(x);
    return n <= radius ? x : x * (radius / n);
  };
  return MappingSpec{whole_space(dimension), T, "ball_projection(" + std::to_string(radius) + ")",
                     {Quasinonexpansive{}, GHCoefficients{1.0, 0.0}}};
}

// ---------------------------------------------------------------------------
// Registry

namespace detail {

/// Argument of a registry call: a scalar or a bracketed coordinate list.
using RegistryArg = std::variant<double, std::vector<double>>;

struct RegistryCall {
  std::string name;
  std::vector<RegistryArg> args;
};

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

inline std::optional<double> parse_number(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

/// Scalar forms: `1.5`, `pi`, `π`, `-pi/3`, `2*pi/3`, `pi*0.5`.
inline std::optional<double> parse_scalar(std::string_view s) {
  s = trim(s);
  if (auto v = parse_number(s)) return v;
  double sign = 1.0;
  if (!s.empty() && s.front() == '-') {
    sign = -1.0;
    s = trim(s.substr(1));
  }
  double value = 1.0;
  bool saw_pi = false;
  // split on '*' and '/', left to right
  std::size_t pos = 0;
  char op = '*';
  while (pos <= s.size()) {
    const std::size_t next = s.find_first_of("*/", pos);
    const std::string_view tok = trim(s.substr(pos, next == std::string_view::npos ? s.npos : next - pos));
    double factor = 0.0;
    if (tok == "pi" || tok == "\xCF\x80") {
      factor = std::numbers::pi;
      saw_pi = true;
    } else if (auto v = parse_number(tok)) {
      factor = *v;
    } else {
      return std::nullopt;
    }
    value = op == '*' ? value * factor : value / factor;
    if (next == std::string_view::npos) break;
    op = s[next];
    pos = next + 1;
  }
  if (!saw_pi) return std::nullopt;
  return sign * value;
}

inline RegistryCall parse_registry_name(std::string_view text) {
  const std::string full(text);
  text = trim(text);
  RegistryCall call;
  const auto open = text.find('(');
  if (open == std::string_view::npos) {
    call.name = std::string(text);
    return call;
  }
  if (text.back() != ')') throw UnknownMapping(full, "malformed mapping name");
  call.name = std::string(trim(text.substr(0, open)));
  std::string_view body = text.substr(open + 1, text.size() - open - 2);
  // split top-level commas, keeping bracketed lists intact
  std::vector<std::string_view> parts;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < body.size(); ++i) {
    if (body[i] == '[') ++depth;
    if (body[i] == ']') --depth;
    if (body[i] == ',' && depth == 0) {
      parts.push_back(body.substr(start, i - start));
      start = i + 1;
    }
  }
  if (!trim(body).empty()) parts.push_back(body.substr(start));
  for (std::string_view part : parts) {
    part = trim(part);
    if (!part.empty() && part.front() == '[') {
      if (part.back() != ']') throw UnknownMapping(full, "malformed coordinate list");
      std::vector<double> coords;
      std::string_view inner = part.substr(1, part.size() - 2);
      std::size_t s = 0;
      while (s <= inner.size()) {
        const auto comma = inner.find(',', s);
        auto v = parse_scalar(inner.substr(s, comma == std::string_view::npos ? inner.npos : comma - s));
        if (!v) throw UnknownMapping(full, "malformed coordinate list");
        coords.push_back(*v);
        if (comma == std::string_view::npos) break;
        s = comma + 1;
      }
      call.args.emplace_back(std::move(coords));
    } else {
      auto v = parse_scalar(part);
      if (!v) throw UnknownMapping(full, "malformed mapping argument");
      call.args.emplace_back(*v);
    }
  }
  return call;
}

inline double scalar_arg(const RegistryCall& call, std::size_t i, const std::string& full) {
  if (i >= call.args.size() || !std::holds_alternative<double>(call.args[i])) {
    throw UnknownMapping(full, "expected a scalar argument");
  }
  return std::get<double>(call.args[i]);
}

inline std::size_t resolve_dimension(std::optional<std::size_t> requested, std::optional<std::size_t> implied,
                                     const std::string& full) {
  if (requested && implied && *requested != *implied) throw DimensionError(*requested, *implied);
  if (implied) return *implied;
  if (requested) return *requested;
  throw UnknownMapping(full, "mapping needs a dimension");
}

inline std::size_t dimension_arg(double v, const std::string& full) {
  if (!(v >= 1.0) || v != std::floor(v)) throw UnknownMapping(full, "dimension must be a positive integer");
  return static_cast<std::size_t>(v);
}

}  // namespace detail

/// Names accepted by `registry_get`.
inline std::vector<std::string> registry_names() {
  return {"paper_example", "negation_d", "rotation_2d", "contraction", "ball_projection"};
}

/// Resolves a registry call such as `rotation_2d(pi/2)`, `contraction(0.5, [1, 2])`
/// or `negation_d`. Dimension-generic mappings take their dimension from a
/// vector argument, an explicit integer argument, or `dimension`.
///
///   paper_example              H = R, C = R \ {0}
///   negation_d[(d)]            T = -I on R^d
///   rotation_2d(theta)         rotation of R^2 about the origin
///   contraction(c, p)          Tx = p + c(x - p); p scalar is broadcast
///   ball_projection(r[, d])    projection onto the radius-r ball of R^d
inline MappingSpec registry_get(std::string_view text, std::optional<std::size_t> dimension = std::nullopt) {
  const std::string full(text);
  const detail::RegistryCall call = detail::parse_registry_name(text);
  const auto nargs = call.args.size();
  auto expect_args = [&](std::size_t lo, std::size_t hi) {
    if (nargs < lo || nargs > hi) throw UnknownMapping(full, "wrong number of arguments");
  };

  MappingSpec out;
  if (call.name == "paper_example") {
    expect_args(0, 0);
    detail::resolve_dimension(dimension, 1, full);
    out = paper_example();
  } else if (call.name == "negation_d") {
    expect_args(0, 1);
    std::optional<std::size_t> implied;
    if (nargs == 1) implied = detail::dimension_arg(detail::scalar_arg(call, 0, full), full);
    out = negation(detail::resolve_dimension(dimension, implied, full));
  } else if (call.name == "rotation_2d") {
    expect_args(1, 1);
    detail::resolve_dimension(dimension, 2, full);
    out = rotation_2d(detail::scalar_arg(call, 0, full));
  } else if (call.name == "contraction") {
    expect_args(2, 2);
    const double c = detail::scalar_arg(call, 0, full);
    if (const auto* p = std::get_if<std::vector<double>>(&call.args[1])) {
      Vector center(*p);
      detail::resolve_dimension(dimension, center.dimension(), full);
      out = contraction(c, std::move(center));
    } else {
      const std::size_t d = dimension.value_or(1);
      out = contraction(c, Vector::constant(d, std::get<double>(call.args[1])));
    }
  } else if (call.name == "ball_projection") {
    expect_args(1, 2);
    std::optional<std::size_t> implied;
    if (nargs == 2) implied = detail::dimension_arg(detail::scalar_arg(call, 1, full), full);
    out = ball_projection(detail::scalar_arg(call, 0, full), detail::resolve_dimension(dimension, implied, full));
  } else {
    throw UnknownMapping(full);
  }
  out.name = full;
  return out;
}

}  // namespace attractor
