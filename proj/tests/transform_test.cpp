#include "layerfem/transform.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "test_util.hpp"

using namespace layerfem;

namespace {

BoundaryValueProblem linear_problem(const std::string& b, const std::string& c,
                                    const std::string& rhs, double eps,
                                    double lo = 0.0, double hi = 1.0) {
  BoundaryValueProblem p;
  p.a = lo;
  p.b_end = hi;
  p.eps = eps;
  p.b = parse_expression(b);
  p.c = parse_expression(c);
  p.rhs = parse_expression(rhs);
  return p;
}

TEST(AuxiliaryProfile, LinearWhenNoTurningPoints) {
  // b = 1 has no zeros: p-hat' = 1 everywhere, so p(x) = 1 + x exactly
  // (a symmetric kernel leaves affine functions unchanged) after the shift.
  auto b = [](double) { return 1.0; };
  const AuxiliaryProfile p(b, 0.0, 1.0, {}, 0.3);
  for (int s = 0; s <= 20; ++s) {
    const double x = s / 20.0;
    EXPECT_NEAR(p.value(x), 1.0 + x, 1e-12);
    EXPECT_NEAR(p.derivative(x), 1.0, 1e-12);
    EXPECT_NEAR(p.second_derivative(x), 0.0, 1e-12);
  }
}

TEST(AuxiliaryProfile, TurningPointShape) {
  // b = x on [-1,1]: p' vanishes near 0, equals sgn(b) away from it,
  // and min p = 1.
  auto b = [](double x) { return x; };
  const double delta0 = 0.3;
  const AuxiliaryProfile p(b, -1.0, 1.0, {0.0}, delta0);
  EXPECT_NEAR(p.derivative(0.0), 0.0, 1e-12);
  EXPECT_NEAR(p.derivative(0.05), 0.0, 1e-12);  // inside B(M, delta0/3)
  EXPECT_NEAR(p.derivative(-0.05), 0.0, 1e-12);
  EXPECT_NEAR(p.derivative(0.9), 1.0, 1e-12);   // outside B(M, delta0)
  EXPECT_NEAR(p.derivative(-0.9), -1.0, 1e-12);
  double pmin = 1e300;
  for (int s = 0; s <= 400; ++s) {
    const double x = -1.0 + 2.0 * s / 400.0;
    pmin = std::min(pmin, p.value(x));
    EXPECT_GE(p.value(x), 1.0 - 1e-10);
    const double sgn = x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0);
    const double dir = sgn * p.derivative(x);
    EXPECT_GE(dir, -1e-10);       // 0 <= sgn(b) p'
    EXPECT_LE(dir, 1.0 + 1e-10);  // <= 1
  }
  EXPECT_NEAR(pmin, 1.0, 1e-9);
}

TEST(AuxiliaryProfile, DerivativesConsistent) {
  // p' and p'' agree with finite differences of p and p'.
  auto b = [](double x) { return x * (x - 0.6); };
  const AuxiliaryProfile p(b, 0.0, 1.0, {0.0, 0.6}, 0.25);
  for (int s = 1; s < 40; ++s) {
    const double x = s / 40.0;
    const double fd1 = testutil::central_difference(
        [&](double y) { return p.value(y); }, x, 1e-6);
    EXPECT_NEAR(p.derivative(x), fd1, 1e-8) << "x=" << x;
    const double fd2 = testutil::central_difference(
        [&](double y) { return p.derivative(y); }, x, 1e-6);
    EXPECT_NEAR(p.second_derivative(x), fd2, 1e-6) << "x=" << x;
  }
}

TEST(Transform, SpecialCaseConstantCoefficients) {
  // b = 1, c = 0, kappa = 1, eps = 0.1: p = 1 + x, c~ = 1 - 0.1 = 0.9.
  auto prob = linear_problem("1", "0", "1", 0.1);
  const TransformedProblem t = transform_linear_problem(prob, 0.3, 1.0);
  EXPECT_TRUE(t.verified);
  for (int s = 0; s <= 1000; ++s) {
    const double x = s / 1000.0;
    EXPECT_NEAR(t.c_t(x), 0.9, 1e-10);
    EXPECT_NEAR(t.b_t(x), 1.0 - 0.2, 1e-10);
  }
  EXPECT_GE(t.min_c_t, 0.9 - 1e-9);
}

TEST(Transform, TinyKappaApproachesIdentity) {
  auto prob = linear_problem("x", "1+x", "exp(x)", 1e-2);
  const TransformedProblem t = transform_linear_problem(prob, 0.3, 1e-14);
  for (double x : {0.1, 0.5, 0.9}) {
    EXPECT_NEAR(t.b_t(x), prob.eval_b(x), 1e-10);
    EXPECT_NEAR(t.c_t(x), prob.eval_c(x), 1e-10);
    EXPECT_NEAR(t.inverse(x, t.forward(x, 2.5)), 2.5, 1e-12);
  }
}

TEST(Transform, OperatorIdentityOnSmoothTest) {
  // L~(e^{-kappa p} v) = e^{-kappa p} L v on v = sin(pi x), 100 points,
  // 1e-8 relative; the left side goes through the transformed coefficients
  // and the product-rule derivatives of e^{-kappa p} v.
  const double pi = 3.14159265358979323846;
  auto prob = linear_problem("x-0.4", "1+x*x", "0", 0.05);
  const double kappa = 0.7;
  const TransformedProblem t = transform_linear_problem(prob, 0.3, kappa);
  auto v = [&](double x) { return std::sin(pi * x); };
  auto dv = [&](double x) { return pi * std::cos(pi * x); };
  auto d2v = [&](double x) { return -pi * pi * std::sin(pi * x); };
  for (int s = 0; s < 100; ++s) {
    const double x = (s + 0.5) / 100.0;
    const double pv = t.p->value(x), pd = t.p->derivative(x),
                 pdd = t.p->second_derivative(x);
    const double e = std::exp(-kappa * pv);
    const double g = e * v(x);
    const double gp = e * (dv(x) - kappa * pd * v(x));
    const double gpp = e * (d2v(x) - 2.0 * kappa * pd * dv(x) +
                            (kappa * kappa * pd * pd - kappa * pdd) * v(x));
    const double lhs = -prob.eps * gpp + t.b_t(x) * gp + t.c_t(x) * g;
    const double rhs = e * (-prob.eps * d2v(x) + prob.eval_b(x) * dv(x) +
                            prob.eval_c(x) * v(x));
    EXPECT_NEAR(lhs, rhs, 1e-8 * (1.0 + std::abs(rhs))) << "x=" << x;
  }
}

TEST(Transform, DefaultKappaForTurningPointProblem) {
  // b = x with c dipping to 0 at the right end: the default kappa must
  // deliver positive transformed bounds for small eps.
  auto prob = linear_problem("x", "1-x", "1", 1e-3);
  const TransformedProblem t = transform_linear_problem(prob, 0.3);
  EXPECT_TRUE(t.verified) << t.report;
  EXPECT_GT(t.min_c_t, 0.0);
  EXPECT_GT(t.min_gap_t, 0.0);
}

TEST(Transform, SolutionsAgreeThroughTheMap) {
  // Solve the original and the transformed problem on the same mesh; u and
  // e^{kappa p} w agree within a small multiple of the discretization error
  // (Richardson-estimated).
  auto prob = linear_problem("1", "0", "1", 0.1);
  prob.nu_minus = 1.0;
  prob.nu_plus = 0.0;
  const TransformedProblem t = transform_linear_problem(prob, 0.3, 1.0);
  ASSERT_TRUE(t.verified);

  auto solve_lin = [](double eps, const ScalarField& b, const ScalarField& c,
                      const ScalarField& f, double num, double nup, int n,
                      int k) {
    auto lift = [=](double x) { return num + (nup - num) * x; };
    const double slope = nup - num;
    ScalarField f_hom = [=](double x) {
      return f(x) - b(x) * slope - c(x) * lift(x);
    };
    auto space = std::make_shared<FESpace>(uniform_mesh(0.0, 1.0, n), k);
    DiscreteFunction w = solve_linear(space, eps, b, c, f_hom);
    return [w, lift](double x) { return w.evaluate(x) + lift(x); };
  };

  const int n = 256, k = 1;
  auto u_n = solve_lin(prob.eps, prob.b_field(), prob.c_field(),
                       prob.rhs_field(), 1.0, 0.0, n, k);
  auto u_2n = solve_lin(prob.eps, prob.b_field(), prob.c_field(),
                        prob.rhs_field(), 1.0, 0.0, 2 * n, k);
  auto w_n = solve_lin(prob.eps, t.b_t, t.c_t, t.rhs_t, t.nu_minus, t.nu_plus,
                       n, k);

  double disc_err = 0.0, map_err = 0.0;
  for (int s = 0; s <= 200; ++s) {
    const double x = s / 200.0;
    disc_err = std::max(disc_err, std::abs(u_n(x) - u_2n(x)));
    map_err = std::max(map_err, std::abs(u_n(x) - t.inverse(x, w_n(x))));
  }
  EXPECT_LE(map_err, 5.0 * disc_err) << "disc=" << disc_err;
}

TEST(Transform, RejectsSemilinear) {
  BoundaryValueProblem p;
  p.b = parse_expression("x");
  p.semilinear = true;
  p.f_semilinear = parse_expression("u");
  EXPECT_THROW(transform_linear_problem(p, 0.3), Error);
}

}  // namespace
