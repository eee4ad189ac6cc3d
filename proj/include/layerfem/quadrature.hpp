#pragma once

// Gauss-Legendre rules (assembly, error integration) and Gauss-Lobatto point
// sets (element node placement). Nodes are computed by Newton iteration on
// the Legendre recurrences; results are deterministic.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "layerfem/expr.hpp"

namespace layerfem {

struct QuadratureRule {
  std::vector<double> points;   // on [0,1]
  std::vector<double> weights;  // sum to 1
};

namespace quad_detail {

// P_n(x) and P_n'(x) on [-1,1] via the three-term recurrence.
inline void legendre(int n, double x, double& p, double& dp) {
  double p0 = 1.0, p1 = x;
  if (n == 0) {
    p = 1.0;
    dp = 0.0;
    return;
  }
  for (int j = 2; j <= n; ++j) {
    const double p2 = ((2 * j - 1) * x * p1 - (j - 1) * p0) / j;
    p0 = p1;
    p1 = p2;
  }
  p = p1;
  dp = n * (x * p1 - p0) / (x * x - 1.0);
}

}  // namespace quad_detail

inline QuadratureRule gauss_legendre(int n) {
  if (n < 1) throw Error("gauss_legendre: need at least one point");
  QuadratureRule rule;
  rule.points.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    // Standard initial guess, then Newton on P_n.
    double x = std::cos(3.14159265358979323846 * (i + 0.75) / (n + 0.5));
    double p, dp;
    for (int it = 0; it < 100; ++it) {
      quad_detail::legendre(n, x, p, dp);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    quad_detail::legendre(n, x, p, dp);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    // Map [-1,1] -> [0,1]; reverse so points ascend.
    rule.points[n - 1 - i] = 0.5 * (1.0 + x);
    rule.weights[n - 1 - i] = 0.5 * w;
  }
  return rule;
}

// n Gauss-Lobatto points on [0,1] (endpoints included), n >= 2.
inline std::vector<double> gauss_lobatto_points(int n) {
  if (n < 2) throw Error("gauss_lobatto_points: need at least two points");
  std::vector<double> pts(n);
  pts.front() = 0.0;
  pts.back() = 1.0;
  const int m = n - 1;  // interior points are roots of P_m'
  for (int i = 1; i < m; ++i) {
    double x = std::cos(3.14159265358979323846 * i / m);
    for (int it = 0; it < 100; ++it) {
      double p, dp;
      quad_detail::legendre(m, x, p, dp);
      // Newton on P_m'(x): d/dx P_m' = (2x dP_m' - m(m+1) P_m)/(1-x^2)
      const double ddp = (2.0 * x * dp - m * (m + 1.0) * p) / (1.0 - x * x);
      const double dx = dp / ddp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    pts[n - 1 - i] = 0.5 * (1.0 + x);
  }
  // Enforce exact symmetry about 1/2.
  for (int i = 0; i < n / 2; ++i) {
    const double s = 0.5 * (pts[i] + (1.0 - pts[n - 1 - i]));
    pts[i] = s;
    pts[n - 1 - i] = 1.0 - s;
  }
  if (n % 2 == 1) pts[n / 2] = 0.5;
  return pts;
}

inline std::vector<double> uniform_points(int n) {
  std::vector<double> pts(n);
  for (int i = 0; i < n; ++i) pts[i] = static_cast<double>(i) / (n - 1);
  return pts;
}

}  // namespace layerfem
