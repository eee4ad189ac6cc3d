#pragma once

// Problem transformation for linear problems whose data only satisfies the
// turning-point assumptions at zeros of b: builds the auxiliary function p
// (mollified piecewise-linear profile with 0 <= sgn(b) p' <= 1, min p = 1)
// and the transformed operator with
//   b~ = b - 2 eps kappa p',
//   c~ = c - eps kappa p'' + b kappa p' - eps kappa^2 (p')^2,
// so that L~(e^{-kappa p} v) = e^{-kappa p} L v.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "layerfem/problem.hpp"
#include "layerfem/quadrature.hpp"

namespace layerfem {

// Smooth auxiliary profile p with consistent first and second derivatives.
// Built from the piecewise-linear p-hat with
//   p-hat'(x) = sgn(b(x)) outside B(M, 2 delta0/3), 0 inside,
// convolved with a compactly supported bump kernel of radius delta0/6.
// Since p-hat is piecewise linear, the convolution reduces to the kernel's
// cumulative mass W and first moment M1 per breakpoint interval; both are
// evaluated with 64-point Gauss quadrature on the smooth bump, so p, p' and
// p'' agree with each other to quadrature accuracy.
class AuxiliaryProfile {
 public:
  AuxiliaryProfile(const std::function<double(double)>& b, double a, double b_end,
                   std::vector<double> zeros, double delta0)
      : a_(a), b_end_(b_end), radius_(delta0 / 6.0) {
    if (!(delta0 > 0.0)) throw Error("auxiliary profile: delta0 must be > 0");
    const double pad = radius_ + delta0;
    const double lo = a_ - pad, hi = b_end_ + pad;
    std::sort(zeros.begin(), zeros.end());

    std::vector<double> cuts{lo};
    for (double z : zeros) {
      cuts.push_back(std::max(lo, z - 2.0 * delta0 / 3.0));
      cuts.push_back(std::min(hi, z + 2.0 * delta0 / 3.0));
    }
    cuts.push_back(hi);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    auto near_zero = [&](double x) {
      for (double z : zeros)
        if (std::abs(x - z) < 2.0 * delta0 / 3.0) return true;
      return false;
    };
    auto sgn_b = [&](double x) {
      const double v = b(std::clamp(x, a_, b_end_));
      return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
    };
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      const double mid = 0.5 * (cuts[i] + cuts[i + 1]);
      Piece piece;
      piece.x0 = cuts[i];
      piece.x1 = cuts[i + 1];
      piece.slope = near_zero(mid) ? 0.0 : sgn_b(mid);
      pieces_.push_back(piece);
    }
    // Anchor p-hat(lo) = 0 and accumulate the piecewise-linear values.
    double v = 0.0;
    for (auto& piece : pieces_) {
      piece.v0 = v;
      v += piece.slope * (piece.x1 - piece.x0);
    }

    mass_ = cumulative(radius_, /*moment=*/false);

    // Shift so min p = 1. p' has the sign pattern of b away from M, so the
    // extrema lie inside the mollified transition zones; breakpoints plus a
    // grid are probed.
    shift_ = 0.0;
    double pmin = std::numeric_limits<double>::infinity();
    for (const auto& piece : pieces_) {
      pmin = std::min(pmin, raw_value(std::clamp(piece.x0, a_, b_end_)));
      pmin = std::min(pmin, raw_value(std::clamp(piece.x1, a_, b_end_)));
    }
    for (int i = 0; i <= 256; ++i)
      pmin = std::min(pmin, raw_value(a_ + (b_end_ - a_) * i / 256.0));
    shift_ = 1.0 - pmin;
  }

  double value(double x) const { return raw_value(x) + shift_; }

  // p'(x) = sum_i slope_i (W(u1) - W(u0)) over the kernel window pieces.
  double derivative(double x) const {
    double s = 0.0;
    for (const auto& piece : pieces_) {
      double u0, u1;
      if (!window(x, piece, u0, u1)) continue;
      s += piece.slope * (W(u1) - W(u0));
    }
    return s;
  }

  // p''(x) = sum over slope jumps of jump * K(x - s); the exact derivative
  // of the expression above.
  double second_derivative(double x) const {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < pieces_.size(); ++i) {
      const double jump = pieces_[i + 1].slope - pieces_[i].slope;
      if (jump != 0.0) s += jump * kernel(x - pieces_[i].x1);
    }
    return s;
  }

  double max_second_derivative() const {
    double m = 0.0;
    for (int i = 0; i <= 2048; ++i) {
      const double x = a_ + (b_end_ - a_) * i / 2048.0;
      m = std::max(m, std::abs(second_derivative(x)));
    }
    return m;
  }

 private:
  struct Piece {
    double x0 = 0.0, x1 = 0.0, slope = 0.0, v0 = 0.0;
  };

  double a_, b_end_, radius_;
  std::vector<Piece> pieces_;
  double mass_ = 1.0;
  double shift_ = 0.0;

  static double bump(double t) {
    const double s = 1.0 - t * t;
    return s > 0.0 ? std::exp(-1.0 / s) : 0.0;
  }

  // integral of K (or s K) from -radius to y, unnormalized bump.
  double cumulative(double y, bool moment) const {
    if (y <= -radius_) return 0.0;
    y = std::min(y, radius_);
    static const QuadratureRule gl = gauss_legendre(64);
    double s = 0.0;
    const double len = y + radius_;
    for (std::size_t q = 0; q < gl.points.size(); ++q) {
      const double t = -radius_ + len * gl.points[q];
      const double kv = bump(t / radius_) / radius_;
      s += len * gl.weights[q] * (moment ? t * kv : kv);
    }
    return s;
  }
  double W(double y) const { return cumulative(y, false) / mass_; }
  double M1(double y) const { return cumulative(y, true) / mass_; }
  double kernel(double y) const {
    return bump(y / radius_) / radius_ / mass_;
  }

  // Kernel-window slice of a piece: s in [u0,u1] has x - s inside the piece.
  bool window(double x, const Piece& piece, double& u0, double& u1) const {
    u0 = std::max(-radius_, x - piece.x1);
    u1 = std::min(radius_, x - piece.x0);
    return u0 < u1;
  }

  double raw_value(double x) const {
    double s = 0.0;
    for (const auto& piece : pieces_) {
      double u0, u1;
      if (!window(x, piece, u0, u1)) continue;
      // integral of K(s) (v0 + slope (x - s - x0)) over [u0, u1]
      s += (piece.v0 + piece.slope * (x - piece.x0)) * (W(u1) - W(u0)) -
           piece.slope * (M1(u1) - M1(u0));
    }
    return s;
  }
};

// ---------------------------------------------------------------------------

struct TransformedProblem {
  double a = 0.0, b_end = 1.0;
  double eps = 0.0;
  double kappa = 0.0;
  ScalarField b_t, c_t, rhs_t;     // transformed coefficients
  ScalarField b_t_prime;           // b~' (for the verification grid)
  double nu_minus = 0.0, nu_plus = 0.0;
  std::function<double(double, double)> forward;  // w = e^{-kappa p} u
  std::function<double(double, double)> inverse;  // u = e^{kappa p} w
  std::shared_ptr<const AuxiliaryProfile> p;

  bool verified = false;
  double min_c_t = 0.0;
  double min_gap_t = 0.0;  // min of c~ - b~'/2
  std::string report;
};

// kappa_hint <= 0 picks the Lemma-A.3 style default from sampled quantities.
inline TransformedProblem transform_linear_problem(
    const BoundaryValueProblem& prob, double delta0, double kappa_hint = -1.0,
    int verification_grid = 1001) {
  prob.check_basic();
  if (prob.semilinear)
    throw Error("transform_linear_problem: linear problems only");

  const Expr bprime_expr = differentiate(prob.b, "x");
  const Expr cprime_expr = differentiate(prob.c, "x");
  auto bfun = prob.b_field();
  auto cfun = prob.c_field();
  auto ffun = prob.rhs_field();
  auto bprime = [&, bprime_expr](double x) {
    Bindings env = prob.base_bindings();
    env["x"] = x;
    return bprime_expr.eval(env);
  };

  // Zeros of b for M (sign-change scan as in classify_layers, plus
  // endpoints when b vanishes there).
  std::vector<double> zeros;
  {
    const int cells = 4000;
    double px = prob.a, pb = bfun(px);
    for (int i = 1; i <= cells; ++i) {
      const double x = prob.a + (prob.b_end - prob.a) * i / cells;
      const double bx = bfun(x);
      if ((pb < 0.0) != (bx < 0.0) && pb != 0.0 && bx != 0.0)
        zeros.push_back(classify_detail::bisect_root(bfun, px, x, pb));
      px = x;
      pb = bx;
    }
    if (std::abs(bfun(prob.a)) <= 1e-12) zeros.push_back(prob.a);
    if (std::abs(bfun(prob.b_end)) <= 1e-12) zeros.push_back(prob.b_end);
    std::sort(zeros.begin(), zeros.end());
  }

  auto p = std::make_shared<AuxiliaryProfile>(bfun, prob.a, prob.b_end, zeros,
                                              delta0);

  double kappa = kappa_hint;
  if (!(kappa > 0.0)) {
    // Sampled ingredients of the Lemma-A.3 default.
    double b0 = std::numeric_limits<double>::infinity();
    double gamma0 = std::numeric_limits<double>::infinity();
    double gamma0_t = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 2000; ++i) {
      const double x = prob.a + (prob.b_end - prob.a) * i / 2000.0;
      bool outside = true;
      for (double z : zeros)
        if (std::abs(x - z) < delta0 / 3.0) outside = false;
      if (outside) b0 = std::min(b0, std::abs(bfun(x)));
      gamma0 = std::min(gamma0, cfun(x));
      gamma0_t = std::min(gamma0_t, cfun(x) - 0.5 * bprime(x));
    }
    double c0 = 0.0, c0_t = 0.0;  // minima over M; 0 when M is empty
    if (!zeros.empty()) {
      c0 = std::numeric_limits<double>::infinity();
      c0_t = std::numeric_limits<double>::infinity();
      for (double z : zeros) {
        c0 = std::min(c0, cfun(z));
        c0_t = std::min(c0_t, cfun(z) - 0.5 * bprime(z));
      }
    }
    if (!(b0 > 0.0))
      throw Error("transform: |b| vanishes outside B(M, delta0/3); "
                  "choose a smaller delta0");
    kappa = (std::max({0.0, 1.0 - gamma0, 1.0 - gamma0_t}) +
             std::max(c0, c0_t) / 4.0) /
            b0;
    if (!(kappa > 0.0)) kappa = 1.0;  // problem already satisfies the bounds
  }

  TransformedProblem out;
  out.a = prob.a;
  out.b_end = prob.b_end;
  out.eps = prob.eps;
  out.kappa = kappa;
  out.p = p;
  const double eps = prob.eps;

  out.b_t = [bfun, p, eps, kappa](double x) {
    return bfun(x) - 2.0 * eps * kappa * p->derivative(x);
  };
  out.c_t = [bfun, cfun, p, eps, kappa](double x) {
    const double dp = p->derivative(x);
    return cfun(x) - eps * kappa * p->second_derivative(x) +
           bfun(x) * kappa * dp - eps * kappa * kappa * dp * dp;
  };
  out.rhs_t = [ffun, p, kappa](double x) {
    return std::exp(-kappa * p->value(x)) * ffun(x);
  };
  out.b_t_prime = [bprime, p, eps, kappa](double x) {
    return bprime(x) - 2.0 * eps * kappa * p->second_derivative(x);
  };
  out.nu_minus = std::exp(-kappa * p->value(prob.a)) * prob.nu_minus;
  out.nu_plus = std::exp(-kappa * p->value(prob.b_end)) * prob.nu_plus;
  out.forward = [p, kappa](double x, double u) {
    return std::exp(-kappa * p->value(x)) * u;
  };
  out.inverse = [p, kappa](double x, double w) {
    return std::exp(kappa * p->value(x)) * w;
  };

  // Verification grid for the transformed assumption bounds.
  out.min_c_t = std::numeric_limits<double>::infinity();
  out.min_gap_t = std::numeric_limits<double>::infinity();
  for (int i = 0; i < verification_grid; ++i) {
    const double x =
        prob.a + (prob.b_end - prob.a) * i / (verification_grid - 1.0);
    out.min_c_t = std::min(out.min_c_t, out.c_t(x));
    out.min_gap_t = std::min(out.min_gap_t, out.c_t(x) - 0.5 * out.b_t_prime(x));
  }
  out.verified = out.min_c_t > 0.0 && out.min_gap_t > 0.0;
  {
    std::ostringstream os;
    os << "kappa=" << kappa << " min c~=" << out.min_c_t
       << " min (c~ - b~'/2)=" << out.min_gap_t
       << (out.verified ? "" : "  [FAILED: kappa or eps outside the admissible range]");
    out.report = os.str();
  }
  return out;
}

}  // namespace layerfem
