#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "attractor/errors.hpp"
#include "attractor/mappings.hpp"
#include "attractor/space.hpp"

namespace attractor {

/// {z : <a, z> <= b}
struct Halfspace {
  Vector a;
  double b = 0.0;

  Halfspace(Vector normal, double offset) : a(std::move(normal)), b(offset) {
    if (squared_norm(a) == 0.0) throw DegenerateConstraint();
  }

  bool holds(const Vector& z, double tol) const { return inner(a, z) <= b + tol; }

  friend bool operator==(const Halfspace&, const Halfspace&) = default;
};

/// Sampled outer approximation of A(T): one half-space per non-vacuous generator.
struct HalfspaceSet {
  std::size_t dimension = 1;
  std::vector<Halfspace> constraints;
  std::vector<Vector> generators;

  bool empty() const noexcept { return constraints.empty(); }
  std::size_t size() const noexcept { return constraints.size(); }

  friend bool operator==(const HalfspaceSet&, const HalfspaceSet&) = default;
};

/// Relative threshold below which |x - Tx| marks a generator as vacuous.
inline constexpr double kVacuousThreshold = 1e-12;

struct ProjectionParams {
  std::size_t max_iter = 10'000;
  double tol = 1e-10;

  friend bool operator==(const ProjectionParams&, const ProjectionParams&) = default;
};

/// The constraint |Tx - z| <= |x - z| rearranged to 2<x - Tx, z> <= |x|^2 - |Tx|^2.
/// Returns nothing when |x - Tx| < threshold * (1 + |x|), i.e. the constraint is all of H.
inline std::optional<Halfspace> halfspace_from_generator(const MappingSpec& T, const Vector& x,
                                                         double threshold = kVacuousThreshold) {
  const Vector Tx = eval(T, x);
  const Vector diff = x - Tx;
  if (norm(diff) < threshold * (1.0 + norm(x))) return std::nullopt;
  return Halfspace(2.0 * diff, squared_norm(x) - squared_norm(Tx));
}

inline HalfspaceSet build_attractor(const MappingSpec& T, std::span<const Vector> generators,
                                    double threshold = kVacuousThreshold) {
  if (generators.empty()) throw NoGenerators();
  HalfspaceSet S;
  S.dimension = T.dimension();
  for (const Vector& x : generators) {
    if (auto h = halfspace_from_generator(T, x, threshold)) {
      S.constraints.push_back(std::move(*h));
      S.generators.push_back(x);
    }
  }
  return S;
}

inline bool member(const HalfspaceSet& S, const Vector& z, double tol) {
  if (z.dimension() != S.dimension) throw DimensionError(S.dimension, z.dimension());
  return std::all_of(S.constraints.begin(), S.constraints.end(), [&](const Halfspace& h) { return h.holds(z, tol); });
}

inline Vector project_halfspace(const Halfspace& h, const Vector& z) {
  const double aa = squared_norm(h.a);
  if (aa == 0.0) throw DegenerateConstraint();
  const double excess = inner(h.a, z) - h.b;
  if (excess <= 0.0) return z;
  return Vector::lincomb(1.0, z, -excess / aa, h.a);
}

/// Largest distance from z to any violated constraint.
inline double max_violation_distance(const HalfspaceSet& S, const Vector& z) {
  double worst = 0.0;
  for (const Halfspace& h : S.constraints) {
    const double excess = inner(h.a, z) - h.b;
    if (excess > 0.0) worst = std::max(worst, excess / norm(h.a));
  }
  return worst;
}

/// Detects an attractor pinned to one point: pairs of opposite constraints
/// form hyperplanes, and when their normals span R^d the unique intersection
/// point is returned (provided every constraint holds there within `tol`).
inline std::optional<Vector> singleton_point(const HalfspaceSet& S, double tol) {
  const std::size_t d = S.dimension;
  const std::size_t m = S.constraints.size();
  std::vector<std::pair<Vector, double>> planes;  // unit normal, offset
  for (std::size_t i = 0; i < m; ++i) {
    const Halfspace& hi = S.constraints[i];
    const double ni = norm(hi.a);
    for (std::size_t j = i + 1; j < m; ++j) {
      const Halfspace& hj = S.constraints[j];
      const double nj = norm(hj.a);
      bool opposite = true;
      for (std::size_t k = 0; k < d && opposite; ++k) {
        opposite = std::abs(hi.a[k] / ni + hj.a[k] / nj) <= 1e-12;
      }
      if (opposite && std::abs(hi.b / ni + hj.b / nj) <= tol) planes.emplace_back(hi.a * (1.0 / ni), hi.b / ni);
    }
  }
  if (planes.size() < d) return std::nullopt;

  Eigen::MatrixXd A(planes.size(), d);
  Eigen::VectorXd rhs(planes.size());
  for (std::size_t r = 0; r < planes.size(); ++r) {
    for (std::size_t k = 0; k < d; ++k) A(r, k) = planes[r].first[k];
    rhs(r) = planes[r].second;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  if (static_cast<std::size_t>(qr.rank()) < d) return std::nullopt;
  const Eigen::VectorXd sol = qr.solve(rhs);
  Vector p(std::vector<double>(sol.data(), sol.data() + d));
  if (max_violation_distance(S, p) > tol) return std::nullopt;
  return p;
}

namespace detail {

/// Plain cyclic projections from z. Returns normally when some iterate is
/// feasible within `tol`; throws AttractorEmpty when the residual stalls or
/// the cycle budget runs out.
inline void feasibility_prepass(const HalfspaceSet& S, const Vector& z, const ProjectionParams& params) {
  Vector x = z;
  double residual = max_violation_distance(S, x);
  double best = residual;
  std::size_t stalled = 0;
  for (std::size_t cycle = 0; cycle < params.max_iter; ++cycle) {
    if (residual <= params.tol) return;
    for (const Halfspace& h : S.constraints) x = project_halfspace(h, x);
    residual = max_violation_distance(S, x);
    if (residual < best * (1.0 - 1e-9)) {
      best = residual;
      stalled = 0;
    } else if (++stalled >= 200) {
      break;
    }
  }
  if (residual <= params.tol) return;
  throw AttractorEmpty(residual);
}

}  // namespace detail

/// Metric projection onto the intersection of the half-spaces of S, computed
/// by Dykstra's cyclic scheme with correction terms. An empty constraint list
/// means the approximation is all of H.
inline Vector project_attractor(const HalfspaceSet& S, const Vector& z, const ProjectionParams& params = {}) {
  if (z.dimension() != S.dimension) throw DimensionError(S.dimension, z.dimension());
  if (S.constraints.empty()) return z;
  if (max_violation_distance(S, z) == 0.0) return z;
  if (auto p = singleton_point(S, params.tol)) return *p;

  detail::feasibility_prepass(S, z, params);

  const std::size_t m = S.constraints.size();
  Vector x = z;
  std::vector<Vector> corrections(m, Vector::zeros(S.dimension));
  double displacement = 0.0;
  for (std::size_t cycle = 0; cycle < params.max_iter; ++cycle) {
    const Vector start = x;
    // x can sit still for a whole cycle while the corrections are still
    // moving, so both have to settle before stopping
    double correction_change = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const Vector y = x + corrections[i];
      x = project_halfspace(S.constraints[i], y);
      Vector c = y - x;
      correction_change += squared_distance(c, corrections[i]);
      corrections[i] = std::move(c);
    }
    displacement = std::max(distance(x, start), std::sqrt(correction_change));
    if (displacement < params.tol) return x;
  }
  throw ProjectionNotConverged(params.max_iter, displacement);
}

inline Vector project_attractor(const HalfspaceSet& S, const Vector& z, std::size_t max_iter, double tol) {
  return project_attractor(S, z, ProjectionParams{max_iter, tol});
}

/// The extension of T to all of H: T on C, projection onto the attractor elsewhere.
class ExtensionMapping {
 public:
  ExtensionMapping(MappingSpec inner, HalfspaceSet attractor, ProjectionParams params = {})
      : inner_(std::move(inner)), attractor_(std::move(attractor)), params_(params) {
    if (attractor_.dimension != inner_.dimension()) throw DimensionError(inner_.dimension(), attractor_.dimension);
  }

  Vector operator()(const Vector& x) const {
    if (x.dimension() != dimension()) throw DimensionError(dimension(), x.dimension());
    if (inner_.domain.membership(x)) return inner_.evaluate(x);
    return project_attractor(attractor_, x, params_);
  }

  std::size_t dimension() const noexcept { return inner_.dimension(); }
  const MappingSpec& inner() const noexcept { return inner_; }
  const HalfspaceSet& attractor() const noexcept { return attractor_; }
  const ProjectionParams& projection_params() const noexcept { return params_; }

  /// T̃ as a mapping on the whole space, for use with the class verifiers.
  MappingSpec as_mapping() const {
    MappingSpec m{whole_space(dimension()), *this, "extension(" + inner_.name + ")", {}};
    return m;
  }

 private:
  MappingSpec inner_;
  HalfspaceSet attractor_;
  ProjectionParams params_;
};

inline ExtensionMapping extend(MappingSpec T, HalfspaceSet S, ProjectionParams params = {}) {
  return ExtensionMapping(std::move(T), std::move(S), params);
}

/// Grid points x with |T̃x - x| <= tol.
inline std::vector<Vector> scan_fixed_points(const ExtensionMapping& ext, std::span<const Vector> grid,
                                             double tol = 1e-9) {
  std::vector<Vector> out;
  for (const Vector& x : grid) {
    if (distance(ext(x), x) <= tol) out.push_back(x);
  }
  return out;
}

/// Grid points of C with |Tx - x| <= tol.
inline std::vector<Vector> scan_fixed_points(const MappingSpec& T, std::span<const Vector> grid, double tol = 1e-9) {
  std::vector<Vector> out;
  for (const Vector& x : grid) {
    if (T.domain.contains(x) && distance(T.evaluate(x), x) <= tol) out.push_back(x);
  }
  return out;
}

/// Checks |Tx - z| <= |x - z| + tol for every point of `probes` lying in C.
/// This is the generator-grid check used to certify candidate attractive points.
inline bool verify_attractive_point(const MappingSpec& T, const Vector& z, std::span<const Vector> probes,
                                    double tol = 1e-9) {
  for (const Vector& x : probes) {
    if (!T.domain.contains(x)) continue;
    if (distance(T.evaluate(x), z) > distance(x, z) + tol) return false;
  }
  return true;
}

}  // namespace attractor
