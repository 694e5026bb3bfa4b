#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <limits>
#include <random>
#include <span>
#include <vector>

#include "attractor/errors.hpp"

namespace attractor {

/// Point of the ambient space R^d.
///
/// Construction from raw coordinates rejects empty and non-finite input.
/// Arithmetic results are not re-validated; iteration code checks
/// `is_finite()` where overflow is possible.
class Vector {
 public:
  explicit Vector(std::vector<double> coords) : coords_(std::move(coords)) {
    if (coords_.empty()) throw DimensionError(1, 0);
    if (!is_finite()) throw NonFiniteValue("vector has non-finite coordinates");
  }
  Vector(std::initializer_list<double> coords) : Vector(std::vector<double>(coords)) {}

  static Vector zeros(std::size_t dimension) {
    if (dimension == 0) throw DimensionError(1, 0);
    return Vector(Unchecked{}, std::vector<double>(dimension, 0.0));
  }
  static Vector constant(std::size_t dimension, double value) {
    return Vector(std::vector<double>(dimension, value));
  }
  static Vector basis(std::size_t dimension, std::size_t index, double scale = 1.0) {
    Vector e = zeros(dimension);
    e.coords_.at(index) = scale;
    return e;
  }

  std::size_t dimension() const noexcept { return coords_.size(); }
  double operator[](std::size_t i) const { return coords_[i]; }
  std::span<const double> coords() const noexcept { return coords_; }

  bool is_finite() const noexcept {
    return std::all_of(coords_.begin(), coords_.end(), [](double v) { return std::isfinite(v); });
  }

  /// Copy with one coordinate replaced.
  Vector with(std::size_t index, double value) const {
    Vector out = *this;
    out.coords_.at(index) = value;
    return out;
  }

  friend bool operator==(const Vector&, const Vector&) = default;

  friend Vector operator+(const Vector& x, const Vector& y) { return combine(x, y, 1.0); }
  friend Vector operator-(const Vector& x, const Vector& y) { return combine(x, y, -1.0); }
  friend Vector operator-(const Vector& x) { return x * -1.0; }
  friend Vector operator*(double s, const Vector& x) { return x * s; }
  friend Vector operator*(const Vector& x, double s) {
    std::vector<double> out(x.coords_);
    for (double& v : out) v *= s;
    return Vector(Unchecked{}, std::move(out));
  }

  /// a*x + b*y evaluated coordinatewise.
  static Vector lincomb(double a, const Vector& x, double b, const Vector& y) {
    require_same(x, y);
    std::vector<double> out(x.dimension());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a * x.coords_[i] + b * y.coords_[i];
    return Vector(Unchecked{}, std::move(out));
  }

  static void require_same(const Vector& x, const Vector& y) {
    if (x.dimension() != y.dimension()) throw DimensionError(x.dimension(), y.dimension());
  }

 private:
  struct Unchecked {};
  Vector(Unchecked, std::vector<double> coords) : coords_(std::move(coords)) {}

  static Vector combine(const Vector& x, const Vector& y, double sign) {
    require_same(x, y);
    std::vector<double> out(x.coords_);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += sign * y.coords_[i];
    return Vector(Unchecked{}, std::move(out));
  }

  std::vector<double> coords_;
};

inline double inner(const Vector& x, const Vector& y) {
  Vector::require_same(x, y);
  double sum = 0.0;
  for (std::size_t i = 0; i < x.dimension(); ++i) sum += x[i] * y[i];
  return sum;
}

inline double squared_norm(const Vector& x) { return inner(x, x); }

inline double norm(const Vector& x) { return std::sqrt(squared_norm(x)); }

/// ||x - y||^2 without materialising the difference.
inline double squared_distance(const Vector& x, const Vector& y) {
  Vector::require_same(x, y);
  double sum = 0.0;
  for (std::size_t i = 0; i < x.dimension(); ++i) {
    const double d = x[i] - y[i];
    sum += d * d;
  }
  return sum;
}

inline double distance(const Vector& x, const Vector& y) { return std::sqrt(squared_distance(x, y)); }

/// Axis-aligned sampling box [lo, hi]^d.
struct Box {
  double lo = -4.0;
  double hi = 4.0;

  friend bool operator==(const Box&, const Box&) = default;
};

/// Deterministic point source. Identical (seed, count, box) give identical output.
using Sampler = std::function<std::vector<Vector>(std::uint64_t seed, std::size_t count, const Box& box)>;
using Membership = std::function<bool(const Vector&)>;

/// The subset C of H on which a mapping is defined.
struct DomainSpec {
  std::size_t dimension = 1;
  Membership membership;
  Sampler sampler;
  bool is_convex = false;
  bool maps_into_self = false;

  bool contains(const Vector& x) const { return x.dimension() == dimension && membership(x); }
  std::vector<Vector> sample(std::uint64_t seed, std::size_t count, const Box& box = {}) const {
    return sampler(seed, count, box);
  }
};

namespace detail {

/// Uniform double in [0, 1) from the top 53 bits of a 64-bit draw; keeps
/// samples identical across standard library implementations.
inline double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace detail

/// Rejection sampler over `box` intersected with the membership predicate.
///
/// With `lattice_step > 0` coordinates are snapped to multiples of the step,
/// so exactly representable special points (0, 1/2, 1, ...) are reachable.
inline Sampler box_sampler(std::size_t dimension, Membership membership, double lattice_step = 0.0) {
  return [dimension, membership = std::move(membership), lattice_step](
             std::uint64_t seed, std::size_t count, const Box& box) {
    if (!(box.hi > box.lo)) throw SamplingFailure("sampling box is empty");
    std::mt19937_64 rng(seed);
    std::vector<Vector> out;
    out.reserve(count);
    const std::size_t max_attempts = 1000 * count + 1000;
    std::size_t attempts = 0;
    std::vector<double> coords(dimension);
    while (out.size() < count) {
      if (++attempts > max_attempts) throw SamplingFailure("rejection sampling exhausted its attempt budget");
      for (double& c : coords) {
        const double u = detail::unit_uniform(rng);
        if (lattice_step > 0.0) {
          const double cells = std::floor((box.hi - box.lo) / lattice_step);
          c = box.lo + lattice_step * std::floor(u * (cells + 1.0));
        } else {
          c = box.lo + u * (box.hi - box.lo);
        }
      }
      Vector x(coords);
      if (membership(x)) out.push_back(std::move(x));
    }
    return out;
  };
}

/// Domain C = R^d.
inline DomainSpec whole_space(std::size_t dimension) {
  if (dimension == 0) throw DimensionError(1, 0);
  auto all = [](const Vector&) { return true; };
  return DomainSpec{dimension, all, box_sampler(dimension, all), true, true};
}

/// All points of the lattice {lo, lo+step, ...} ∩ [lo, hi] raised to the d-th power.
/// Coordinates are computed as lo + k*step so dyadic steps stay exact.
inline std::vector<Vector> lattice_points(std::size_t dimension, double lo, double hi, double step) {
  if (dimension == 0) throw DimensionError(1, 0);
  if (!(step > 0.0) || !(hi >= lo)) throw SamplingFailure("invalid lattice bounds");
  const auto per_axis = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  std::size_t total = 1;
  for (std::size_t i = 0; i < dimension; ++i) {
    if (total > 50'000'000 / per_axis) throw SamplingFailure("lattice is too large");
    total *= per_axis;
  }
  std::vector<Vector> out;
  out.reserve(total);
  std::vector<std::size_t> index(dimension, 0);
  std::vector<double> coords(dimension);
  for (std::size_t n = 0; n < total; ++n) {
    for (std::size_t i = 0; i < dimension; ++i) coords[i] = lo + static_cast<double>(index[i]) * step;
    out.emplace_back(coords);
    for (std::size_t i = dimension; i-- > 0;) {
      if (++index[i] < per_axis) break;
      index[i] = 0;
    }
  }
  return out;
}

struct ConvexitySpotCheck {
  std::size_t pairs_checked = 0;
  std::size_t midpoint_failures = 0;
};

/// Diagnostic only: samples pairs of C and tests their midpoints for membership.
/// A clean result is not a proof of convexity.
inline ConvexitySpotCheck spot_check_convexity(const DomainSpec& domain, std::size_t pairs,
                                               std::uint64_t seed, const Box& box = {}) {
  const auto pts = domain.sample(seed, 2 * pairs, box);
  ConvexitySpotCheck result;
  for (std::size_t i = 0; i + 1 < pts.size(); i += 2) {
    ++result.pairs_checked;
    if (!domain.membership(Vector::lincomb(0.5, pts[i], 0.5, pts[i + 1]))) ++result.midpoint_failures;
  }
  return result;
}

}  // namespace attractor
