#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "attractor/errors.hpp"
#include "attractor/mappings.hpp"
#include "attractor/space.hpp"

namespace attractor {

inline constexpr double kDefaultClassTolerance = 1e-9;

/// Outcome of a sample-based class check. `satisfied` is evidence, not proof.
///
/// For pair inequalities the witness is the ordered pair (x, y); for
/// quasinonexpansiveness with respect to a set it is (x, z).
struct ClassVerdict {
  bool satisfied = true;
  std::optional<std::pair<Vector, Vector>> witness;
  double max_violation = -std::numeric_limits<double>::infinity();
  std::size_t samples_checked = 0;
};

/// Sampling controls shared by the pair verifiers.
struct SearchOptions {
  std::size_t samples = 10000;
  std::uint64_t seed = 0;
  double tol = kDefaultClassTolerance;
  Box box{};
  std::size_t refine_rounds = 20;
};

// ---------------------------------------------------------------------------
// Pointwise slacks: positive means the inequality is violated by that amount.

/// |Tx - z| - |x - z|
inline double quasinonexpansive_slack(const Vector& x, const Vector& Tx, const Vector& z) {
  return distance(Tx, z) - distance(x, z);
}

/// Left side minus right side of the generalized hybrid inequality.
inline double generalized_hybrid_slack(const GHCoefficients& c, const Vector& x, const Vector& Tx, const Vector& y,
                                       const Vector& Ty) {
  const double lhs = c.alpha * squared_distance(Tx, Ty) + (1.0 - c.alpha) * squared_distance(x, Ty);
  const double rhs = c.beta * squared_distance(Tx, y) + (1.0 - c.beta) * squared_distance(x, y);
  return lhs - rhs;
}

/// Seven-term form of the widely more generalized hybrid inequality.
///
/// The x<->y mirrored terms are summed pairwise so that evaluating
/// `wmgh_swap(c)` at (y, x) reproduces this value bit for bit.
inline double wmgh_value(const WMGHCoefficients& c, const Vector& x, const Vector& Tx, const Vector& y,
                         const Vector& Ty) {
  const Vector rx = x - Tx;
  const Vector ry = y - Ty;
  const double cross = c.beta * squared_distance(x, Ty) + c.gamma * squared_distance(Tx, y);
  const double self = c.epsilon * squared_norm(rx) + c.zeta * squared_norm(ry);
  return c.alpha * squared_distance(Tx, Ty) + cross + c.delta * squared_distance(x, y) + self +
         c.eta * squared_distance(rx, ry);
}

// ---------------------------------------------------------------------------
// Coefficient-level operations

/// alpha+beta+gamma+delta >= 0, alpha+gamma > 0, epsilon+eta >= 0.
inline bool wmgh_condition_A(const WMGHCoefficients& c) {
  // grouped so that beta and gamma enter symmetrically
  const double total = (c.alpha + c.delta) + (c.beta + c.gamma);
  return total >= 0.0 && c.alpha + c.gamma > 0.0 && c.epsilon + c.eta >= 0.0;
}

/// alpha+beta+gamma+delta >= 0, alpha+beta > 0, zeta+eta >= 0.
inline bool wmgh_condition_B(const WMGHCoefficients& c) {
  const double total = (c.alpha + c.delta) + (c.beta + c.gamma);
  return total >= 0.0 && c.alpha + c.beta > 0.0 && c.zeta + c.eta >= 0.0;
}

/// Coefficients of the same inequality with the roles of x and y exchanged.
inline WMGHCoefficients wmgh_swap(const WMGHCoefficients& c) {
  return WMGHCoefficients{c.alpha, c.gamma, c.beta, c.delta, c.zeta, c.epsilon, c.eta};
}

/// Generalized hybrid (alpha, beta) as a WMGH tuple.
inline WMGHCoefficients wmgh_from_gh(const GHCoefficients& c) {
  return WMGHCoefficients{c.alpha, 1.0 - c.alpha, -c.beta, -(1.0 - c.beta), 0.0, 0.0, 0.0};
}

// ---------------------------------------------------------------------------
// Search machinery

namespace detail {

using PairSlack = std::function<double(const Vector& x, const Vector& Tx, const Vector& y, const Vector& Ty)>;

inline bool lexicographically_less(const Vector& a, const Vector& b) {
  return std::lexicographical_compare(a.coords().begin(), a.coords().end(), b.coords().begin(), b.coords().end());
}

/// Local coordinate search around a pair, maximising the larger of the two
/// orderings. The pair is canonicalised first so mirrored inputs follow an
/// identical path. Returns the best ordered pair and its slack.
inline std::pair<std::pair<Vector, Vector>, double> refine_pair(const MappingSpec& T, const PairSlack& slack,
                                                                Vector x, Vector y, const SearchOptions& opts,
                                                                std::size_t& evaluations) {
  if (lexicographically_less(y, x)) std::swap(x, y);
  const std::size_t d = x.dimension();

  struct Scored {
    double value;
    bool forward;
  };
  auto score = [&](const Vector& a, const Vector& b) {
    const Vector Ta = T.evaluate(a);
    const Vector Tb = T.evaluate(b);
    evaluations += 2;
    const double f = slack(a, Ta, b, Tb);
    const double r = slack(b, Tb, a, Ta);
    return f >= r ? Scored{f, true} : Scored{r, false};
  };

  Scored best = score(x, y);
  double step = (opts.box.hi - opts.box.lo) / 16.0;
  for (std::size_t round = 0; round < opts.refine_rounds; ++round, step *= 0.5) {
    for (std::size_t k = 0; k < 2 * d; ++k) {
      for (double sign : {1.0, -1.0}) {
        Vector cx = x;
        Vector cy = y;
        if (k < d) {
          cx = x.with(k, x[k] + sign * step);
        } else {
          cy = y.with(k - d, y[k - d] + sign * step);
        }
        if (!T.domain.membership(cx) || !T.domain.membership(cy)) continue;
        const Scored s = score(cx, cy);
        if (s.value > best.value) {
          best = s;
          x = std::move(cx);
          y = std::move(cy);
        }
      }
    }
  }
  if (best.forward) return {{std::move(x), std::move(y)}, best.value};
  return {{std::move(y), std::move(x)}, best.value};
}

/// Two-phase falsification for an inequality over C x C.
///
/// Phase one evaluates seeded draws as (x, y), (y, x), (x, x). Phase two
/// refines around the worst pair found. The witness is the first violating
/// pair of phase one, or the refined pair when only phase two violates.
inline ClassVerdict check_pairs(const MappingSpec& T, const PairSlack& slack, const SearchOptions& opts) {
  const std::size_t draws = (opts.samples + 2) / 3;
  const auto points = T.domain.sample(opts.seed, 2 * draws, opts.box);

  ClassVerdict verdict;
  std::optional<std::pair<Vector, Vector>> worst;
  auto consider = [&](const Vector& x, const Vector& Tx, const Vector& y, const Vector& Ty) {
    const double v = slack(x, Tx, y, Ty);
    ++verdict.samples_checked;
    if (v > verdict.max_violation) {
      verdict.max_violation = v;
      worst.emplace(x, y);
    }
    if (v > opts.tol && !verdict.witness) verdict.witness.emplace(x, y);
  };
  for (std::size_t i = 0; i < draws; ++i) {
    const Vector& x = points[2 * i];
    const Vector& y = points[2 * i + 1];
    const Vector Tx = T.evaluate(x);
    const Vector Ty = T.evaluate(y);
    consider(x, Tx, y, Ty);
    consider(y, Ty, x, Tx);
    consider(x, Tx, x, Tx);
  }

  if (worst && opts.refine_rounds > 0) {
    std::size_t evaluations = 0;
    auto [pair, value] = refine_pair(T, slack, worst->first, worst->second, opts, evaluations);
    verdict.samples_checked += evaluations;
    if (value > verdict.max_violation) verdict.max_violation = value;
    if (value > opts.tol && !verdict.witness) verdict.witness = std::move(pair);
  }
  verdict.satisfied = !verdict.witness.has_value();
  return verdict;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Verifiers

/// |Tx - z| <= |x - z| + tol for every x in `points` and z in `reference`.
/// Points outside the domain are skipped.
inline ClassVerdict check_quasinonexpansive_wrt(const MappingSpec& T, std::span<const Vector> reference,
                                                std::span<const Vector> points, double tol = kDefaultClassTolerance) {
  if (reference.empty()) throw EmptyReferenceSet();
  ClassVerdict verdict;
  for (const Vector& x : points) {
    if (!T.domain.contains(x)) continue;
    const Vector Tx = T.evaluate(x);
    for (const Vector& z : reference) {
      const double v = quasinonexpansive_slack(x, Tx, z);
      ++verdict.samples_checked;
      verdict.max_violation = std::max(verdict.max_violation, v);
      if (v > tol && !verdict.witness) verdict.witness.emplace(x, z);
    }
  }
  verdict.satisfied = !verdict.witness.has_value();
  return verdict;
}

/// Sampled form: draws `samples` points of C, then refines x around the worst
/// (x, z) pair by coordinate search.
inline ClassVerdict check_quasinonexpansive_wrt(const MappingSpec& T, std::span<const Vector> reference,
                                                std::size_t samples, std::uint64_t seed,
                                                double tol = kDefaultClassTolerance, const Box& box = {},
                                                std::size_t refine_rounds = 20) {
  if (reference.empty()) throw EmptyReferenceSet();
  const auto points = T.domain.sample(seed, samples, box);
  ClassVerdict verdict = check_quasinonexpansive_wrt(T, reference, points, tol);
  if (points.empty() || refine_rounds == 0) return verdict;

  // locate the worst pair again for refinement
  const Vector* worst_x = nullptr;
  const Vector* worst_z = nullptr;
  double worst = -std::numeric_limits<double>::infinity();
  for (const Vector& x : points) {
    const Vector Tx = T.evaluate(x);
    for (const Vector& z : reference) {
      const double v = quasinonexpansive_slack(x, Tx, z);
      if (v > worst) {
        worst = v;
        worst_x = &x;
        worst_z = &z;
      }
    }
  }
  Vector x = *worst_x;
  const Vector& z = *worst_z;
  double step = (box.hi - box.lo) / 16.0;
  for (std::size_t round = 0; round < refine_rounds; ++round, step *= 0.5) {
    for (std::size_t k = 0; k < x.dimension(); ++k) {
      for (double sign : {1.0, -1.0}) {
        Vector cand = x.with(k, x[k] + sign * step);
        if (!T.domain.membership(cand)) continue;
        const double v = quasinonexpansive_slack(cand, T.evaluate(cand), z);
        ++verdict.samples_checked;
        if (v > worst) {
          worst = v;
          x = std::move(cand);
        }
      }
    }
  }
  verdict.max_violation = std::max(verdict.max_violation, worst);
  if (worst > tol && !verdict.witness) verdict.witness.emplace(x, z);
  verdict.satisfied = !verdict.witness.has_value();
  return verdict;
}

inline ClassVerdict check_generalized_hybrid(const MappingSpec& T, const GHCoefficients& c,
                                             const SearchOptions& opts) {
  return detail::check_pairs(
      T,
      [c](const Vector& x, const Vector& Tx, const Vector& y, const Vector& Ty) {
        return generalized_hybrid_slack(c, x, Tx, y, Ty);
      },
      opts);
}

inline ClassVerdict check_generalized_hybrid(const MappingSpec& T, const GHCoefficients& c, std::size_t samples,
                                             std::uint64_t seed, double tol = kDefaultClassTolerance) {
  return check_generalized_hybrid(T, c, SearchOptions{samples, seed, tol});
}

inline ClassVerdict check_wmgh(const MappingSpec& T, const WMGHCoefficients& c, const SearchOptions& opts) {
  return detail::check_pairs(
      T,
      [c](const Vector& x, const Vector& Tx, const Vector& y, const Vector& Ty) {
        return wmgh_value(c, x, Tx, y, Ty);
      },
      opts);
}

inline ClassVerdict check_wmgh(const MappingSpec& T, const WMGHCoefficients& c, std::size_t samples,
                               std::uint64_t seed, double tol = kDefaultClassTolerance) {
  return check_wmgh(T, c, SearchOptions{samples, seed, tol});
}

}  // namespace attractor
