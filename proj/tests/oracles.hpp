#pragma once

// Reference computations used only by the tests. Nothing here calls into the
// projection or verification code it is used to check.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <utility>
#include <vector>

namespace oracle {

using Point = std::vector<double>;

struct Constraint {
  Point a;
  double b;
};

inline double dot(const Point& x, const Point& y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

inline double dist(const Point& x, const Point& y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - y[i]) * (x[i] - y[i]);
  return std::sqrt(s);
}

/// Solves M v = r by Gaussian elimination with partial pivoting; nothing when singular.
inline std::optional<Point> solve(std::vector<Point> M, Point r) {
  const std::size_t n = r.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t i = c + 1; i < n; ++i) {
      if (std::abs(M[i][c]) > std::abs(M[piv][c])) piv = i;
    }
    if (std::abs(M[piv][c]) < 1e-12) return std::nullopt;
    std::swap(M[piv], M[c]);
    std::swap(r[piv], r[c]);
    for (std::size_t i = c + 1; i < n; ++i) {
      const double f = M[i][c] / M[c][c];
      for (std::size_t k = c; k < n; ++k) M[i][k] -= f * M[c][k];
      r[i] -= f * r[c];
    }
  }
  Point v(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = r[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= M[i][k] * v[k];
    v[i] = s / M[i][i];
  }
  return v;
}

/// Exact projection onto {w : <a_i, w> <= b_i} by enumerating active sets of
/// at most d constraints: each candidate is the projection onto an affine
/// face, and the answer is the nearest feasible candidate.
inline Point project_by_active_sets(const std::vector<Constraint>& cs, const Point& z, double feas_tol = 1e-9) {
  const std::size_t m = cs.size();
  const std::size_t d = z.size();
  Point best;
  double best_dist = std::numeric_limits<double>::infinity();
  auto feasible = [&](const Point& w) {
    for (const auto& c : cs) {
      if (dot(c.a, w) > c.b + feas_tol * (1.0 + std::sqrt(dot(c.a, c.a)))) return false;
    }
    return true;
  };
  auto try_face = [&](const std::vector<std::size_t>& act) {
    Point w = z;
    if (!act.empty()) {
      const std::size_t k = act.size();
      std::vector<Point> G(k, Point(k));
      Point r(k);
      for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) G[i][j] = dot(cs[act[i]].a, cs[act[j]].a);
        r[i] = dot(cs[act[i]].a, z) - cs[act[i]].b;
      }
      auto lambda = solve(G, r);
      if (!lambda) return;
      for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t c = 0; c < d; ++c) w[c] -= (*lambda)[i] * cs[act[i]].a[c];
      }
    }
    if (!feasible(w)) return;
    const double dd = dist(w, z);
    if (dd < best_dist) {
      best_dist = dd;
      best = w;
    }
  };
  // every subset of at most d constraints, in lexicographic order
  std::vector<std::size_t> act;
  auto visit = [&](auto&& self, std::size_t start) -> void {
    try_face(act);
    if (act.size() == d) return;
    for (std::size_t i = start; i < m; ++i) {
      act.push_back(i);
      self(self, i + 1);
      act.pop_back();
    }
  };
  visit(visit, 0);
  return best;
}

/// Nearest feasible point of a 2-D grid with spacing `h` over [lo, hi]^2.
inline Point grid_argmin_2d(const std::vector<Constraint>& cs, const Point& z, double lo, double hi, double h) {
  Point best;
  double best_dist = std::numeric_limits<double>::infinity();
  const auto n = static_cast<std::size_t>(std::llround((hi - lo) / h));
  for (std::size_t i = 0; i <= n; ++i) {
    for (std::size_t j = 0; j <= n; ++j) {
      const Point w{lo + static_cast<double>(i) * h, lo + static_cast<double>(j) * h};
      bool ok = true;
      for (const auto& c : cs) ok = ok && dot(c.a, w) <= c.b + 1e-12;
      if (ok && dist(w, z) < best_dist) {
        best_dist = dist(w, z);
        best = w;
      }
    }
  }
  return best;
}

/// Random polyhedron with `m` constraints through a common interior point.
struct RandomPolyhedron {
  std::vector<Constraint> constraints;
  Point interior;
};

inline RandomPolyhedron random_polyhedron(std::mt19937_64& rng, std::size_t d, std::size_t m) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  RandomPolyhedron p;
  p.interior.resize(d);
  for (double& c : p.interior) c = -1.0 + 2.0 * unit(rng);
  for (std::size_t i = 0; i < m; ++i) {
    Point a(d);
    for (double& c : a) c = normal(rng);
    const double slack = 0.05 + unit(rng);
    p.constraints.push_back({a, dot(a, p.interior) + slack});
  }
  return p;
}

/// `paper_example` on R \ {0}, written out independently.
inline double paper_T(double x) { return x == 1.0 ? 1.0 : -x; }

/// Generalized hybrid slack for scalar mappings.
inline double gh_slack_1d(double alpha, double beta, double x, double y, double (*T)(double)) {
  const double Tx = T(x);
  const double Ty = T(y);
  const double lhs = alpha * (Tx - Ty) * (Tx - Ty) + (1.0 - alpha) * (x - Ty) * (x - Ty);
  const double rhs = beta * (Tx - y) * (Tx - y) + (1.0 - beta) * (x - y) * (x - y);
  return lhs - rhs;
}

/// Brute-force search of the grid {k/4 : -8 <= k <= 8, k != 0}^2 for a violating pair.
inline std::optional<std::pair<double, double>> paper_gh_violation(double alpha, double beta, double tol = 1e-9) {
  for (int i = -8; i <= 8; ++i) {
    for (int j = -8; j <= 8; ++j) {
      if (i == 0 || j == 0) continue;
      const double x = i / 4.0;
      const double y = j / 4.0;
      if (gh_slack_1d(alpha, beta, x, y, paper_T) > tol) return std::pair{x, y};
    }
  }
  return std::nullopt;
}

}  // namespace oracle
