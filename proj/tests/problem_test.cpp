#include "layerfem/problem.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "test_util.hpp"

using namespace layerfem;

namespace {

BoundaryValueProblem linear_problem(const std::string& b, const std::string& c,
                                    const std::string& rhs = "1",
                                    double lo = 0.0, double hi = 1.0) {
  BoundaryValueProblem p;
  p.a = lo;
  p.b_end = hi;
  p.b = parse_expression(b);
  p.c = parse_expression(c);
  p.rhs = parse_expression(rhs);
  return p;
}

TEST(CheckAssumptions, LinearMinima) {
  // b = x, c = 2+x: b' = 1, min c = 2 at x=0, min(c - b'/2) = 1.5 at x=0.
  auto p = linear_problem("x", "2+x");
  const auto rep = check_assumptions(p, 101);
  EXPECT_TRUE(rep.ok);
  EXPECT_NEAR(rep.min_c, 2.0, 1e-14);
  EXPECT_NEAR(rep.min_c_minus_half_bprime, 1.5, 1e-14);
  EXPECT_TRUE(rep.witnesses.empty());
}

TEST(CheckAssumptions, NoConvection) {
  auto p = linear_problem("0", "1");
  const auto rep = check_assumptions(p);
  EXPECT_TRUE(rep.ok);
  EXPECT_NEAR(rep.min_c_minus_half_bprime, 1.0, 1e-14);
}

TEST(CheckAssumptions, FailureWithWitness) {
  auto p = linear_problem("x", "0.4");
  const auto rep = check_assumptions(p, 101);
  EXPECT_FALSE(rep.ok);
  EXPECT_NEAR(rep.min_c_minus_half_bprime, -0.1, 1e-14);
  EXPECT_FALSE(rep.witnesses.empty());
}

TEST(CheckAssumptions, SemilinearCubic) {
  BoundaryValueProblem p;
  p.a = 0.0;
  p.b_end = 1.0;
  p.b = parse_expression("0");
  p.semilinear = true;
  p.f_semilinear = parse_expression("u + u^3 - 1");
  p.gamma = 1.0;
  const auto rep = check_assumptions(p, 51);
  EXPECT_TRUE(rep.ok);
  // df/du = 1 + 3u^2 >= 1; the u-grid is sampled, so the reported minimum
  // sits at the sample nearest u = 0.
  EXPECT_GE(rep.min_c, 1.0);
  EXPECT_LE(rep.min_c, 1.05);
}

// ---------------------------------------------------------------------------

TEST(Classify, RepulsiveBoundaryTurningPoint) {
  // b = x on [0,1]: power layer at 0, eps-width exponential layer at 1.
  auto p = linear_problem("x", "2");
  p.eps = 1e-6;
  const LayerMap lm = classify_layers(p, 1);
  ASSERT_EQ(lm.pow_boundary.size(), 1u);
  EXPECT_DOUBLE_EQ(lm.pow_boundary[0].location, 0.0);
  EXPECT_NEAR(lm.pow_boundary[0].lambda_cap, 2.0, 1e-12);  // c(0)/a(0)
  ASSERT_EQ(lm.exp_boundary.size(), 1u);
  EXPECT_DOUBLE_EQ(lm.exp_boundary[0].location, 1.0);
  EXPECT_FALSE(lm.exp_boundary[0].sqrt_width);
  EXPECT_NEAR(lm.exp_boundary[0].beta, 1.0, 1e-12);  // b(1)
  EXPECT_TRUE(lm.interior.empty());
  // kinds recorded
  bool saw_repulsive = false;
  for (const auto& tp : lm.turning_points)
    if (tp.kind == TurningPointKind::BoundaryRepulsive) saw_repulsive = true;
  EXPECT_TRUE(saw_repulsive);
}

TEST(Classify, TwoExponentialLayersOfDifferentWidth) {
  // b = x^2 on [0,1]: multiple turning point at 0 (sqrt(eps) width,
  // beta = sqrt(c(0))), outflow at 1 (eps width, beta = b(1) = 1).
  auto p = linear_problem("x^2", "2");
  p.eps = 1e-8;
  const LayerMap lm = classify_layers(p, 1);
  ASSERT_EQ(lm.exp_boundary.size(), 2u);
  const auto& left = lm.exp_boundary[0].location == 0.0 ? lm.exp_boundary[0]
                                                        : lm.exp_boundary[1];
  const auto& right = lm.exp_boundary[0].location == 1.0 ? lm.exp_boundary[0]
                                                         : lm.exp_boundary[1];
  EXPECT_TRUE(left.sqrt_width);
  EXPECT_NEAR(left.beta, std::sqrt(2.0), 1e-12);
  EXPECT_FALSE(right.sqrt_width);
  EXPECT_NEAR(right.beta, 1.0, 1e-12);
  EXPECT_TRUE(lm.pow_boundary.empty());
  // typical widths follow the natural-log formulas
  EXPECT_NEAR(left.typical_width,
              std::sqrt(1e-8) / std::sqrt(2.0) * std::log(1.0 / 1e-4), 1e-12);
  EXPECT_NEAR(right.typical_width, 1e-8 * std::log(1e8), 1e-18);
}

TEST(Classify, InteriorAndBoundaryTurningPoints) {
  // The [-1,1] problem: zeros of b at -1 (boundary repulsive), 0 (interior
  // attractive), 1/2 (interior repulsive), 27/30 (interior multiple).
  auto p = linear_problem("-(x+1)*x*(x-1/2)*(x-27/30)^3", "6", "1", -1.0, 1.0);
  p.eps = 1e-6;
  const LayerMap lm = classify_layers(p, 1);
  ASSERT_EQ(lm.pow_boundary.size(), 1u);
  EXPECT_DOUBLE_EQ(lm.pow_boundary[0].location, -1.0);
  EXPECT_NEAR(lm.pow_boundary[0].b_prime, 10.2885, 1e-3);
  ASSERT_EQ(lm.interior.size(), 1u);
  EXPECT_NEAR(lm.interior[0].location, 0.0, 1e-10);
  EXPECT_NEAR(lm.interior[0].b_prime, -0.3645, 1e-6);
  EXPECT_NEAR(lm.interior[0].lambda_cap, 6.0 / 0.3645, 1e-3);
  EXPECT_FALSE(lm.interior[0].in_m_k);  // -(k+1) b' = 0.729 < 6
  EXPECT_TRUE(lm.exp_boundary.empty());
  // the repulsive point at 1/2 and the multiple point at 27/30 are recorded
  int repulsive = 0, multiple = 0;
  for (const auto& tp : lm.turning_points) {
    if (tp.kind == TurningPointKind::InteriorRepulsive) ++repulsive;
    if (tp.kind == TurningPointKind::InteriorMultiple) ++multiple;
  }
  EXPECT_EQ(repulsive, 1);
  EXPECT_EQ(multiple, 1);
}

TEST(Classify, MkMembership) {
  // strongly attractive interior point: b = -5x, c = 1 -> in M_k for any k;
  // weakly attractive: b = -0.1 x -> not in M_1.
  auto strong = linear_problem("-5*x", "1", "1", -1.0, 1.0);
  const LayerMap lm1 = classify_layers(strong, 1);
  ASSERT_EQ(lm1.interior.size(), 1u);
  EXPECT_TRUE(lm1.interior[0].in_m_k);

  auto weak = linear_problem("-0.1*x", "1", "1", -1.0, 1.0);
  const LayerMap lm2 = classify_layers(weak, 1);
  ASSERT_EQ(lm2.interior.size(), 1u);
  EXPECT_FALSE(lm2.interior[0].in_m_k);
}

TEST(Classify, DeclaredRootsMatchScanned) {
  auto p = linear_problem("-(x+1)*x*(x-1/2)*(x-27/30)^3", "6", "1", -1.0, 1.0);
  const LayerMap scanned = classify_layers(p, 2);
  const LayerMap declared =
      classify_layers(p, 2, std::vector<double>{0.0, 0.5, 0.9});
  ASSERT_EQ(scanned.interior.size(), declared.interior.size());
  for (std::size_t i = 0; i < scanned.interior.size(); ++i)
    EXPECT_NEAR(scanned.interior[i].location, declared.interior[i].location,
                1e-10);
  ASSERT_EQ(scanned.pow_boundary.size(), declared.pow_boundary.size());
}

TEST(Classify, SeparationDistances) {
  // b = 4(x-0.5)(x-0.9)(x-1.2): b(0) < 0 gives an outflow layer at 0,
  // b(1) < 0 is inflow at 1; roots 0.5 (repulsive) and 0.9 (attractive).
  auto p = linear_problem("4*(x-0.5)*(x-0.9)*(x-1.2)", "0.5");
  p.eps = 1e-8;
  const LayerMap lm = classify_layers(p, 1);
  ASSERT_EQ(lm.exp_boundary.size(), 1u);
  EXPECT_DOUBLE_EQ(lm.exp_boundary[0].location, 0.0);
  EXPECT_NEAR(lm.exp_boundary[0].beta, 2.16, 1e-9);
  ASSERT_EQ(lm.interior.size(), 1u);
  EXPECT_NEAR(lm.interior[0].location, 0.9, 1e-10);
  // -(k+1) b'(0.9) = 0.96 >= c = 0.5: the point is in M_1, so both
  // distances see it.
  EXPECT_TRUE(lm.interior[0].in_m_k);
  EXPECT_NEAR(lm.exp_boundary[0].delta, 0.9, 1e-9);
  EXPECT_NEAR(lm.exp_boundary[0].delta_k, 0.9, 1e-9);

  // With c = 2 the same point leaves M_1 and delta_k grows to the far
  // endpoint while delta keeps seeing M_0.
  auto q = linear_problem("4*(x-0.5)*(x-0.9)*(x-1.2)", "2");
  q.eps = 1e-8;
  const LayerMap lmq = classify_layers(q, 1);
  ASSERT_EQ(lmq.interior.size(), 1u);
  EXPECT_FALSE(lmq.interior[0].in_m_k);
  EXPECT_NEAR(lmq.exp_boundary[0].delta, 0.9, 1e-9);
  EXPECT_NEAR(lmq.exp_boundary[0].delta_k, 1.0, 1e-12);
}

TEST(Classify, AmbiguousBoundaryDerivative) {
  // |b'(0)| = 1e-10 sits between the root tolerance and the ambiguity
  // tolerance: classification must ask for a declaration.
  auto p = linear_problem("1e-10*x + x^2", "1");
  EXPECT_THROW(classify_layers(p, 1), ClassifyError);
}

// ---------------------------------------------------------------------------

TEST(APrioriBound, NoLayersGivesOne) {
  auto p = linear_problem("1", "1");  // inflow at 0, outflow at 1
  p.eps = 1e-4;
  LayerMap lm;  // empty map: no boundary or interior terms
  lm.k = 1;
  EXPECT_DOUBLE_EQ(a_priori_bound(0.5, 1, lm, p, {}), 1.0);
  EXPECT_DOUBLE_EQ(a_priori_bound(0.0, 3, lm, p, {}), 1.0);
}

TEST(APrioriBound, OutflowLayerDominatesAtBoundary) {
  // At x = 1, k = 1, eps = 1e-4: the eps^-1 e^0 = 1e4 term dominates.
  auto p = linear_problem("x", "2");
  p.eps = 1e-4;
  const LayerMap lm = classify_layers(p, 1);
  const double bound = a_priori_bound(1.0, 1, lm, p, {{0.0, 1.0}});
  EXPECT_GE(bound, 1e4);
  EXPECT_LE(bound, 1.1e4);
}

TEST(APrioriBound, AwayFromLayersBounded) {
  // phi terms at distance >= x_tilde obey (k/(beta x_tilde))^k.
  auto p = linear_problem("x", "2");
  p.eps = 1e-6;
  const LayerMap lm = classify_layers(p, 1);
  const double x_tilde = 0.4;  // distance from the layer at 1
  const int k = 2;
  const double phi_bound = std::pow(k / (1.0 * x_tilde), k);
  // contribution at x = 0.6 from the outflow layer must respect the bound
  const double total = a_priori_bound(0.6, k, lm, p, {{0.0, 1.0}});
  // subtract the constant and the power-layer term at 0 to isolate it
  const double power_term = std::pow(p.eps, 1.0 / 2.0) *
                            std::pow(std::sqrt(p.eps) + 0.6, -1.0 - k);
  EXPECT_LE(total - 1.0 - power_term, phi_bound * (1.0 + 1e-9));
}

TEST(APrioriBound, ExponentialCasesStayBelowThreeAtKZero) {
  // k = 0, no interior points: 1 + two phi_0 terms, each <= 1 for the
  // exponential cases.
  auto p = linear_problem("x^2", "2");  // sqrt(eps) layer at 0, eps at 1
  p.eps = 1e-6;
  const LayerMap lm = classify_layers(p, 1);
  for (int s = 0; s <= 50; ++s) {
    const double x = s / 50.0;
    EXPECT_LE(a_priori_bound(x, 0, lm, p, {}), 3.0 + 1e-12);
  }
}

TEST(APrioriBound, RejectsBadLambda) {
  auto p = linear_problem("x", "2");
  p.eps = 1e-4;
  const LayerMap lm = classify_layers(p, 1);
  EXPECT_THROW(a_priori_bound(0.5, 1, lm, p, {{0.0, 5.0}}), Error);
}

// ---------------------------------------------------------------------------

TEST(Homogenize, IdentityWhenAlreadyZero) {
  auto p = linear_problem("x", "2", "exp(x)");
  const HomogenizedProblem hp = homogenize(p);
  EXPECT_DOUBLE_EQ(hp.lift(0.3), 0.0);
  EXPECT_TRUE(structurally_equal(hp.problem.rhs, p.rhs));
}

TEST(Homogenize, LinearLiftFormula) {
  // [0,1], nu- = 1, nu+ = 3: lift = 1 + 2x; rhs~ = rhs - 2 b - c (1 + 2x).
  auto p = linear_problem("x", "2+x", "exp(x)");
  p.nu_minus = 1.0;
  p.nu_plus = 3.0;
  const HomogenizedProblem hp = homogenize(p);
  for (int s = 0; s <= 10; ++s) {
    const double x = s / 10.0;
    EXPECT_NEAR(hp.lift(x), 1.0 + 2.0 * x, 1e-15);
    const double expected =
        std::exp(x) - x * 2.0 - (2.0 + x) * (1.0 + 2.0 * x);
    EXPECT_NEAR(hp.problem.eval_rhs(x), expected, 1e-14);
  }
  EXPECT_DOUBLE_EQ(hp.problem.nu_minus, 0.0);
  EXPECT_DOUBLE_EQ(hp.problem.nu_plus, 0.0);
}

TEST(Homogenize, SemilinearSubstitution) {
  // f~(x,u) = f(x, u + lift) + b lift'
  BoundaryValueProblem p;
  p.a = 0.0;
  p.b_end = 1.0;
  p.b = parse_expression("x");
  p.semilinear = true;
  p.f_semilinear = parse_expression("u + u^3 - x");
  p.nu_minus = 1.0;
  p.nu_plus = 3.0;
  const HomogenizedProblem hp = homogenize(p);
  for (double x : {0.0, 0.25, 0.7}) {
    for (double u : {-1.0, 0.0, 2.0}) {
      const double lift = 1.0 + 2.0 * x;
      const double shifted = (u + lift) + std::pow(u + lift, 3) - x;
      EXPECT_NEAR(hp.problem.eval_f(x, u), shifted + x * 2.0, 1e-13);
    }
  }
}

TEST(Homogenize, RoundTripBoundaryValues) {
  // solve the homogenized problem and un-lift: boundary values are exact.
  auto p = linear_problem("1", "2", "1");
  p.eps = 0.05;
  p.nu_minus = -0.5;
  p.nu_plus = 2.0;
  const HomogenizedProblem hp = homogenize(p);
  auto space = std::make_shared<FESpace>(uniform_mesh(0.0, 1.0, 64), 2);
  const DiscreteFunction w =
      solve_linear(space, p.eps, hp.problem.b_field(), hp.problem.c_field(),
                   hp.problem.rhs_field());
  EXPECT_DOUBLE_EQ(w.evaluate(0.0) + hp.lift(0.0), -0.5);
  EXPECT_DOUBLE_EQ(w.evaluate(1.0) + hp.lift(1.0), 2.0);
}

TEST(RegionSpec, FromLayerMap) {
  auto p = linear_problem("x", "2");
  p.eps = 1e-8;
  const LayerMap lm = classify_layers(p, 1);
  const LayerRegionSpec spec = to_region_spec(lm, 0.9);
  ASSERT_EQ(spec.exp_layers.size(), 1u);
  ASSERT_EQ(spec.power_points.size(), 1u);
  EXPECT_DOUBLE_EQ(spec.power_points[0].lambda, 0.0);  // B_pow uses lambda=0
  EXPECT_FALSE(spec.power_points[0].interior);
}

}  // namespace
