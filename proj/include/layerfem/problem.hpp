#pragma once

// Problem model for -eps u'' + b u' + f(x,u) = 0 on [a,b] (and its linear
// specialization f(x,u) = c(x)u - f(x)): standing-assumption checks, turning
// point and layer classification, the a priori derivative-bound evaluator
// used as a test oracle, and boundary-condition homogenization.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "layerfem/expr.hpp"
#include "layerfem/fem.hpp"

namespace layerfem {

struct ClassifyError : Error {
  using Error::Error;
};

// ---------------------------------------------------------------------------

struct BoundaryValueProblem {
  double a = 0.0, b_end = 1.0;  // interval [a, b_end]
  double eps = 1e-4;
  Expr b;  // convection coefficient, in x

  bool semilinear = false;
  // Linear case: f(x,u) = c(x) u - rhs(x).
  Expr c;
  Expr rhs;
  // Semilinear case: f(x,u) as an expression in x and u; c_lower is the
  // continuous lower bound for df/du used in classification (defaults to the
  // constant gamma).
  Expr f_semilinear;
  std::optional<Expr> c_lower;

  double nu_minus = 0.0, nu_plus = 0.0;
  double gamma = 1.0, gamma_tilde = 1.0;  // declared lower-bound constants

  // Extra named parameters available inside the expressions (besides x, u,
  // and eps which is bound automatically).
  std::map<std::string, double> parameters;

  void check_basic() const {
    if (!(a < b_end)) throw Error("problem: need a < b");
    if (!(eps > 0.0)) throw Error("problem: eps must be positive");
  }

  Bindings base_bindings() const {
    Bindings env(parameters.begin(), parameters.end());
    env["eps"] = eps;
    return env;
  }

  double eval_b(double x) const {
    Bindings env = base_bindings();
    env["x"] = x;
    return b.eval(env);
  }
  double eval_c(double x) const {
    Bindings env = base_bindings();
    env["x"] = x;
    if (!semilinear) return c.eval(env);
    if (c_lower) return c_lower->eval(env);
    return gamma;
  }
  double eval_rhs(double x) const {
    Bindings env = base_bindings();
    env["x"] = x;
    return rhs.eval(env);
  }
  double eval_f(double x, double u) const {
    Bindings env = base_bindings();
    env["x"] = x;
    env["u"] = u;
    if (semilinear) return f_semilinear.eval(env);
    return c.eval(env) * u - rhs.eval(env);
  }

  ScalarField b_field() const {
    return [*this](double x) { return eval_b(x); };
  }
  ScalarField c_field() const {
    return [*this](double x) { return eval_c(x); };
  }
  ScalarField rhs_field() const {
    return [*this](double x) { return eval_rhs(x); };
  }
};

// ---------------------------------------------------------------------------
// Assumption check: samples c (or df/du) and c - b'/2 on a grid.

struct AssumptionReport {
  bool ok = false;
  double min_c = 0.0;
  double min_c_minus_half_bprime = 0.0;
  std::vector<double> witnesses;  // sample points where a minimum is <= 0
};

inline AssumptionReport check_assumptions(const BoundaryValueProblem& p,
                                          int grid_size = 101,
                                          double u_lo = 0.0, double u_hi = 0.0) {
  p.check_basic();
  if (grid_size < 2) throw Error("check_assumptions: grid_size must be >= 2");
  const Expr bprime = differentiate(p.b, "x");

  double u_min = u_lo, u_max = u_hi;
  if (p.semilinear && u_min == 0.0 && u_max == 0.0) {
    // Default u-range from the inverse-monotonicity bound:
    // |u| <= max{|nu-|, |nu+|, max |f(.,0)|/gamma}.
    double fmax = 0.0;
    for (int i = 0; i < grid_size; ++i) {
      const double x = p.a + (p.b_end - p.a) * i / (grid_size - 1);
      fmax = std::max(fmax, std::abs(p.eval_f(x, 0.0)));
    }
    const double m = std::max({std::abs(p.nu_minus), std::abs(p.nu_plus),
                               fmax / p.gamma});
    u_min = -m;
    u_max = m;
  }

  const Expr fu =
      p.semilinear ? differentiate(p.f_semilinear, "u") : Expr::number(0.0);

  AssumptionReport rep;
  rep.min_c = std::numeric_limits<double>::infinity();
  rep.min_c_minus_half_bprime = std::numeric_limits<double>::infinity();
  for (int i = 0; i < grid_size; ++i) {
    const double x = p.a + (p.b_end - p.a) * i / (grid_size - 1);
    Bindings env = p.base_bindings();
    env["x"] = x;

    double cmin_here;
    if (p.semilinear) {
      cmin_here = std::numeric_limits<double>::infinity();
      const int usteps = std::max(2, grid_size / 4);
      for (int s = 0; s < usteps; ++s) {
        env["u"] = u_min + (u_max - u_min) * s / (usteps - 1);
        cmin_here = std::min(cmin_here, fu.eval(env));
      }
    } else {
      cmin_here = p.c.eval(env);
    }
    const double gap = cmin_here - 0.5 * bprime.eval(env);
    if (cmin_here < rep.min_c) rep.min_c = cmin_here;
    if (gap < rep.min_c_minus_half_bprime) rep.min_c_minus_half_bprime = gap;
    if (cmin_here <= 0.0 || gap <= 0.0) rep.witnesses.push_back(x);
  }
  rep.ok = rep.min_c > 0.0 && rep.min_c_minus_half_bprime > 0.0;
  return rep;
}

// ---------------------------------------------------------------------------
// Turning points and layer classification.

enum class TurningPointKind {
  InteriorAttractive,
  InteriorRepulsive,
  InteriorMultiple,
  BoundaryAttractive,
  BoundaryRepulsive,
  BoundaryMultiple,
  OutflowBoundary,
  InflowBoundary,
};

inline const char* turning_point_kind_name(TurningPointKind k) {
  switch (k) {
    case TurningPointKind::InteriorAttractive: return "interior-attractive";
    case TurningPointKind::InteriorRepulsive: return "interior-repulsive";
    case TurningPointKind::InteriorMultiple: return "interior-multiple";
    case TurningPointKind::BoundaryAttractive: return "boundary-attractive";
    case TurningPointKind::BoundaryRepulsive: return "boundary-repulsive";
    case TurningPointKind::BoundaryMultiple: return "boundary-multiple";
    case TurningPointKind::OutflowBoundary: return "outflow-boundary";
    case TurningPointKind::InflowBoundary: return "inflow-boundary";
  }
  return "?";
}

struct TurningPoint {
  double location = 0.0;
  TurningPointKind kind = TurningPointKind::InteriorAttractive;
  double b_prime = 0.0;
  double c_value = 0.0;
  std::optional<double> lambda_cap;  // c/|b'| when b' != 0
};

struct ExpBoundaryLayer {
  double location = 0.0;
  bool sqrt_width = false;  // false: width ~ eps, true: width ~ sqrt(eps)
  double beta = 0.0;        // |b(x)| or sqrt(c(x))
  double delta = 0.0;       // min distance to other layer locations (M_0)
  double delta_k = 0.0;     // min distance using M_k (assumption (4.13))
  double typical_width = 0.0;  // delta-bar-star
};

struct PowBoundaryLayer {
  double location = 0.0;
  double b_prime = 0.0;
  double c_value = 0.0;
  double lambda_cap = 0.0;  // c/|b'|
};

struct InteriorPoint {
  double location = 0.0;
  double b_prime = 0.0;   // < 0
  double c_value = 0.0;
  double lambda_cap = 0.0;  // c/|b'|
  bool in_m_k = false;      // -(k+1) b' >= c
};

struct LayerMap {
  std::vector<ExpBoundaryLayer> exp_boundary;   // B_exp
  std::vector<PowBoundaryLayer> pow_boundary;   // B_pow
  std::vector<InteriorPoint> interior;          // M_0 (flag marks M_k)
  std::vector<TurningPoint> turning_points;     // everything found, for reports
  int k = 1;

  std::vector<double> m0_locations() const {
    std::vector<double> r;
    for (const auto& p : interior) r.push_back(p.location);
    return r;
  }
  std::vector<double> mk_locations() const {
    std::vector<double> r;
    for (const auto& p : interior)
      if (p.in_m_k) r.push_back(p.location);
    return r;
  }
};

namespace classify_detail {

inline double bisect_root(const std::function<double(double)>& f, double lo,
                          double hi, double f_lo) {
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (hi - lo < 1e-12 * std::max(1.0, std::abs(mid))) return mid;
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((f_lo < 0.0) == (fm < 0.0)) {
      lo = mid;
      f_lo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

inline double min_distance(double x, const std::vector<double>& others) {
  double d = std::numeric_limits<double>::infinity();
  for (double y : others)
    if (y != x) d = std::min(d, std::abs(x - y));
  return d;
}

}  // namespace classify_detail

// Scans b for sign changes (simple roots) unless roots are declared; multiple
// roots cannot be detected numerically and must be declared.
inline LayerMap classify_layers(
    const BoundaryValueProblem& p, int k,
    const std::optional<std::vector<double>>& declared_roots = std::nullopt,
    int scan_cells = 10000, double root_tol = 1e-12) {
  p.check_basic();
  if (k < 1) throw ClassifyError("classify_layers: order k must be >= 1");
  const Expr bprime_expr = differentiate(p.b, "x");
  auto bprime = [&](double x) {
    Bindings env = p.base_bindings();
    env["x"] = x;
    return bprime_expr.eval(env);
  };
  auto bval = [&](double x) { return p.eval_b(x); };
  auto cval = [&](double x) { return p.eval_c(x); };

  const double len = p.b_end - p.a;
  const double ambiguity_tol = 1e-8;

  std::vector<double> roots;  // interior roots only
  if (declared_roots) {
    for (double r : *declared_roots)
      if (r > p.a + root_tol * len && r < p.b_end - root_tol * len)
        roots.push_back(r);
  } else {
    double prev_x = p.a;
    double prev_b = bval(prev_x);
    for (int i = 1; i <= scan_cells; ++i) {
      const double x = p.a + len * i / scan_cells;
      const double bx = bval(x);
      if (bx == 0.0 && prev_b != 0.0 && i < scan_cells) {
        roots.push_back(x);  // root landed exactly on a scan point
      } else if ((prev_b < 0.0) != (bx < 0.0) && prev_b != 0.0 && bx != 0.0) {
        roots.push_back(
            classify_detail::bisect_root(bval, prev_x, x, prev_b));
      }
      prev_x = x;
      prev_b = bx;
    }
  }
  std::sort(roots.begin(), roots.end());
  roots.erase(std::unique(roots.begin(), roots.end(),
                          [&](double a, double b) {
                            return std::abs(a - b) <= 10 * root_tol * len;
                          }),
              roots.end());

  LayerMap lm;
  lm.k = k;

  // Interior points.
  for (double r : roots) {
    const double bp = bprime(r);
    const double cv = cval(r);
    TurningPoint tp;
    tp.location = r;
    tp.b_prime = bp;
    tp.c_value = cv;
    if (std::abs(bp) > root_tol) tp.lambda_cap = cv / std::abs(bp);
    if (bp < -ambiguity_tol) {
      tp.kind = TurningPointKind::InteriorAttractive;
      InteriorPoint ip{r, bp, cv, cv / std::abs(bp),
                       -(k + 1.0) * bp >= cv};
      lm.interior.push_back(ip);
    } else if (bp > ambiguity_tol) {
      tp.kind = TurningPointKind::InteriorRepulsive;
    } else {
      tp.kind = TurningPointKind::InteriorMultiple;
    }
    lm.turning_points.push_back(tp);
  }

  // Boundary classification; n(a) = -1, n(b) = +1.
  struct BoundaryProbe {
    double x;
    double n;
  };
  for (const BoundaryProbe& bp : {BoundaryProbe{p.a, -1.0},
                                  BoundaryProbe{p.b_end, 1.0}}) {
    const double bx = bval(bp.x);
    const double bpr = bprime(bp.x);
    const double cv = cval(bp.x);
    TurningPoint tp;
    tp.location = bp.x;
    tp.b_prime = bpr;
    tp.c_value = cv;
    if (std::abs(bx) > root_tol) {
      if (bx * bp.n > 0.0) {
        tp.kind = TurningPointKind::OutflowBoundary;
        lm.exp_boundary.push_back(
            {bp.x, /*sqrt_width=*/false, std::abs(bx), 0.0, 0.0, 0.0});
      } else {
        tp.kind = TurningPointKind::InflowBoundary;
      }
    } else {
      // Boundary turning point.
      if (std::abs(bpr) > ambiguity_tol) {
        // Flow points away from the boundary when b' > 0, into it when
        // b' < 0, at either endpoint.
        tp.lambda_cap = cv / std::abs(bpr);
        tp.kind = bpr > 0.0 ? TurningPointKind::BoundaryRepulsive
                            : TurningPointKind::BoundaryAttractive;
        lm.pow_boundary.push_back({bp.x, bpr, cv, cv / std::abs(bpr)});
      } else if (std::abs(bpr) <= root_tol) {
        tp.kind = TurningPointKind::BoundaryMultiple;
        if (!(cv > 0.0))
          throw ClassifyError(
              "multiple boundary turning point at x = " +
              std::to_string(bp.x) + " needs c(x) > 0 for a sqrt(eps) layer");
        lm.exp_boundary.push_back(
            {bp.x, /*sqrt_width=*/true, std::sqrt(cv), 0.0, 0.0, 0.0});
      } else {
        throw ClassifyError(
            "ambiguous boundary turning point at x = " + std::to_string(bp.x) +
            ": |b'| = " + std::to_string(std::abs(bpr)) +
            " is between the root tolerance and the ambiguity tolerance; "
            "declare the multiplicity via declared_roots/problem data");
      }
    }
    lm.turning_points.push_back(tp);
  }

  // Separation distances and typical widths.
  const std::vector<double> m0 = lm.m0_locations();
  const std::vector<double> mk = lm.mk_locations();
  for (auto& e : lm.exp_boundary) {
    std::vector<double> others_m0 = m0, others_mk = mk;
    const double other_end = (e.location == p.a) ? p.b_end : p.a;
    others_m0.push_back(other_end);
    others_mk.push_back(other_end);
    e.delta = classify_detail::min_distance(e.location, others_m0);
    e.delta_k = classify_detail::min_distance(e.location, others_mk);
    e.typical_width =
        e.sqrt_width
            ? std::sqrt(p.eps) / e.beta * std::log(1.0 / std::sqrt(p.eps))
            : p.eps / e.beta * std::log(1.0 / p.eps);
    if (e.typical_width < 0.0) e.typical_width = 0.0;  // eps >= 1
  }
  return lm;
}

// Region description consumed by general_layer_mesh. Power adaptation covers
// B_pow (lambda = 0) and M_k points (lambda = mu c/|b'| < k+1).
inline LayerRegionSpec to_region_spec(const LayerMap& lm, double mu = 0.9) {
  LayerRegionSpec spec;
  for (const auto& e : lm.exp_boundary)
    spec.exp_layers.push_back({e.location, e.beta, e.sqrt_width, e.delta_k});
  for (const auto& pb : lm.pow_boundary)
    spec.power_points.push_back({pb.location, 0.0, /*interior=*/false});
  for (const auto& ip : lm.interior)
    if (ip.in_m_k)
      spec.power_points.push_back(
          {ip.location, mu * ip.lambda_cap, /*interior=*/true});
  return spec;
}

// ---------------------------------------------------------------------------
// A priori derivative bound (right side of the bound in the a priori
// estimate, unit constant). Used only as a shape oracle in tests.

namespace apriori_detail {

// The phi case table as printed; cases are tested in print order. a and bp
// are b(xbar) (sign-adjusted so a < 0 means outflow) and b'(xbar).
inline double phi(double x, int k, double a, double bp, double c_at, double lam,
                  double eps) {
  if (a < 0.0) return std::pow(eps, -k) * std::exp(a * x / eps);
  if (a == 0.0 && bp > 0.0)
    return std::pow(eps, lam / 2.0) * std::pow(std::sqrt(eps) + x, -lam - k);
  if (a == 0.0 && 0.0 <= -k * bp && -k * bp < c_at)
    return std::pow(eps, -k / 2.0) *
           std::exp(-std::sqrt(c_at + bp) * x / std::sqrt(eps));
  if (a == 0.0 && bp < 0.0)
    return std::pow(std::sqrt(eps) + x, lam - k) +
           eps * std::pow(std::sqrt(eps) + x, -k - 2.0);
  if (a > 0.0) return 0.0;
  throw Error("a_priori_bound: no phi case applies (a = 0, b' = " +
              std::to_string(bp) + ", k b' >= c)");
}

}  // namespace apriori_detail

// lambda_choices maps a layer location to the lambda used there; interior
// points and boundary power cases require 0 < lambda < c/|b'|.
inline double a_priori_bound(double x, int k, const LayerMap& lm,
                             const BoundaryValueProblem& p,
                             const std::map<double, double>& lambda_choices) {
  p.check_basic();
  if (x < p.a || x > p.b_end) throw Error("a_priori_bound: x outside interval");
  auto lambda_at = [&](double loc, double cap) {
    auto it = lambda_choices.find(loc);
    if (it == lambda_choices.end()) return 0.5 * cap;
    if (!(it->second > 0.0) || !(it->second < cap))
      throw Error("a_priori_bound: lambda at " + std::to_string(loc) +
                  " outside (0, c/|b'|)");
    return it->second;
  };

  double bound = 1.0;
  // Boundary terms: the case table evaluated at both endpoints, with the
  // convention a = b(a_lo) on the left and a = -b(a_hi) on the right.
  for (const auto& tp : lm.turning_points) {
    if (tp.location != p.a && tp.location != p.b_end) continue;
    const double dist = std::abs(x - tp.location);
    double b_at = p.eval_b(tp.location);
    if (std::abs(b_at) <= 1e-12) b_at = 0.0;  // snap to the turning-point case
    const double a_arg = (tp.location == p.a) ? b_at : -b_at;
    double lam = 0.0;
    if (tp.kind == TurningPointKind::BoundaryRepulsive ||
        tp.kind == TurningPointKind::BoundaryAttractive)
      lam = lambda_at(tp.location, tp.c_value / std::abs(tp.b_prime));
    bound += apriori_detail::phi(dist, k, a_arg, tp.b_prime, tp.c_value, lam,
                                 p.eps);
  }
  for (const auto& ip : lm.interior) {
    const double lam = lambda_at(ip.location, ip.lambda_cap);
    bound += std::pow(std::sqrt(p.eps) + std::abs(x - ip.location), lam - k);
  }
  return bound;
}

// ---------------------------------------------------------------------------
// Homogenization: affine lift u-tilde with u-tilde'' = 0.

struct AffineLift {
  double a = 0.0, b_end = 1.0;
  double nu_minus = 0.0, nu_plus = 0.0;
  double operator()(double x) const {
    return ((b_end - x) * nu_minus + (x - a) * nu_plus) / (b_end - a);
  }
  double slope() const { return (nu_plus - nu_minus) / (b_end - a); }
};

struct HomogenizedProblem {
  BoundaryValueProblem problem;  // nu = 0
  AffineLift lift;
};

namespace hom_detail {

// Substitute sym -> replacement throughout the tree.
inline expr_detail::NodePtr substitute(const expr_detail::NodePtr& n,
                                       const std::string& sym,
                                       const expr_detail::NodePtr& rep) {
  using namespace expr_detail;
  switch (n->kind) {
    case Kind::Number:
    case Kind::Pi:
      return n;
    case Kind::Symbol:
      return n->name == sym ? rep : n;
    case Kind::Neg:
      return make_neg(substitute(n->a, sym, rep));
    case Kind::Call:
      return make_call(n->fn, substitute(n->a, sym, rep));
    default:
      return make_binary(n->kind, substitute(n->a, sym, rep),
                         substitute(n->b, sym, rep));
  }
}

}  // namespace hom_detail

inline Expr substitute(const Expr& e, const std::string& symbol,
                       const Expr& replacement) {
  return Expr(hom_detail::substitute(e.node(), symbol, replacement.node()));
}

inline HomogenizedProblem homogenize(const BoundaryValueProblem& p) {
  p.check_basic();
  HomogenizedProblem out;
  out.lift = {p.a, p.b_end, p.nu_minus, p.nu_plus};
  out.problem = p;
  out.problem.nu_minus = 0.0;
  out.problem.nu_plus = 0.0;
  if (p.nu_minus == 0.0 && p.nu_plus == 0.0) return out;

  // u-tilde(x) = ((b-x) nu- + (x-a) nu+) / (b-a); u-tilde'' = 0.
  const Expr x = Expr::symbol("x");
  const Expr lift = (Expr::number(p.b_end) - x) * Expr::number(p.nu_minus / (p.b_end - p.a)) +
                    (x - Expr::number(p.a)) * Expr::number(p.nu_plus / (p.b_end - p.a));
  const Expr slope = Expr::number(out.lift.slope());

  if (p.semilinear) {
    // f~(x,u) = f(x, u + lift(x)) + b(x) lift'(x)
    const Expr shifted =
        substitute(p.f_semilinear, "u", Expr::symbol("u") + lift);
    out.problem.f_semilinear = shifted + p.b * slope;
  } else {
    // rhs~ = rhs - b lift' - c lift
    out.problem.rhs = p.rhs - p.b * slope - p.c * lift;
  }
  return out;
}

}  // namespace layerfem
