#include "layerfem/harness.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "test_util.hpp"

using namespace layerfem;

namespace {

ExperimentConfig preset_config(const std::string& name) {
  ExperimentConfig cfg;
  cfg.preset = name;
  apply_preset(cfg);
  return cfg;
}

TEST(Config, ParseRoundTrip) {
  const std::string text = R"cfg(
# experiment description
[problem]
interval = 0 1
b = "x"
c = "2"
rhs = "1"
nu_minus = 0.5
gamma = 2
gamma_tilde = 1.5
param.alpha = 3.5

[discretization]
k = 2
N = 64, 128, 256
eps = 1e-4 1e-6
rho = 3
generator = bakhvalov-s
node_rule = uniform

[reference]
strategy = exact
exact_u = "sin(pi*x)"

[output]
path = out.csv
seed = 7
)cfg";
  const ExperimentConfig cfg = parse_config(text);
  EXPECT_EQ(cfg.b_expr, "x");
  EXPECT_EQ(cfg.c_expr, "2");
  EXPECT_DOUBLE_EQ(cfg.nu_minus, 0.5);
  EXPECT_DOUBLE_EQ(cfg.parameters.at("alpha"), 3.5);
  EXPECT_EQ(cfg.k, 2);
  ASSERT_EQ(cfg.n_values.size(), 3u);
  EXPECT_EQ(cfg.n_values[1], 128);
  ASSERT_EQ(cfg.eps_values.size(), 2u);
  EXPECT_DOUBLE_EQ(cfg.eps_values[1], 1e-6);
  EXPECT_DOUBLE_EQ(cfg.rho, 3.0);
  EXPECT_EQ(cfg.generator, "bakhvalov-s");
  EXPECT_EQ(cfg.node_rule, "uniform");
  EXPECT_EQ(cfg.reference, "exact");
  EXPECT_EQ(cfg.out_path, "out.csv");
  EXPECT_EQ(cfg.seed, 7ul);
}

TEST(Config, Errors) {
  EXPECT_THROW(parse_config("[problem]\nnonsense_key = 1\n"), ConfigError);
  EXPECT_THROW(parse_config("[problem\n"), ConfigError);
  EXPECT_THROW(parse_config("[problem]\nk 2\n"), ConfigError);
  EXPECT_THROW(parse_config("[discretization]\neps = -1\n"), ConfigError);
  EXPECT_THROW(parse_config("[discretization]\nN = 63\n[problem]\nb=\"x\"\n"),
               ConfigError);
  EXPECT_THROW(parse_config("[problem]\npreset = no-such\n"), ConfigError);
}

TEST(Presets, AllPassAssumptionCheck) {
  for (const std::string& name : preset_names()) {
    ExperimentConfig cfg = preset_config(name);
    const BoundaryValueProblem prob = build_problem(cfg, 1e-6);
    const AssumptionReport rep = check_assumptions(prob, 201);
    EXPECT_TRUE(rep.ok) << name << ": min c = " << rep.min_c
                        << ", min(c - b'/2) = "
                        << rep.min_c_minus_half_bprime;
    EXPECT_GT(rep.min_c, 0.0) << name;
    EXPECT_GT(rep.min_c_minus_half_bprime, 0.0) << name;
  }
}

TEST(Classify, RepBouTppText) {
  ExperimentConfig cfg = preset_config("rep-bou-tpp");
  const std::string text = run_classify(cfg, 1e-6);
  EXPECT_NE(text.find("power layer at 0"), std::string::npos) << text;
  EXPECT_NE(text.find("exponential layer (eps-width, beta=1) at 1"),
            std::string::npos)
      << text;
}

TEST(Classify, TwoExpLayerText) {
  ExperimentConfig cfg = preset_config("two-exp-layer-tpp");
  const std::string text = run_classify(cfg, 1e-8);
  EXPECT_NE(text.find("sqrt(eps)-width"), std::string::npos) << text;
  EXPECT_NE(text.find("eps-width"), std::string::npos) << text;
}

TEST(Classify, ClassicalNonTurningCase) {
  ExperimentConfig cfg;
  cfg.b_expr = "1+x";
  cfg.c_expr = "1";
  cfg.rhs_expr = "1";
  const std::string text = run_classify(cfg, 1e-6);
  EXPECT_NE(text.find("exponential layer"), std::string::npos);
  EXPECT_EQ(text.find("power layer"), std::string::npos);
}

// ---------------------------------------------------------------------------

TEST(Solve, ManufacturedLinearAccuracy) {
  ExperimentConfig cfg = preset_config("manufactured-linear");
  cfg.k = 2;
  cfg.mesh_kind = "uniform";
  // Quasi-optimality pins the N=64 energy error near C * 64^-2 with C ~ 1;
  // doubling N brings it below 1e-4.
  const SolveRunResult res = run_solve(cfg, 64, 1.0);
  ASSERT_TRUE(res.report.has_value());
  EXPECT_LT(res.report->energy, 5e-4);
  EXPECT_NE(res.dump.find("# x u"), std::string::npos);
  const SolveRunResult fine = run_solve(cfg, 128, 1.0);
  EXPECT_LT(fine.report->energy, 1e-4);
}

TEST(Solve, ZeroDataGivesZeroSolution) {
  ExperimentConfig cfg;
  cfg.b_expr = "1";
  cfg.c_expr = "1";
  cfg.rhs_expr = "0";
  cfg.reference = "none";
  cfg.mesh_kind = "uniform";
  const SolveRunResult res = run_solve(cfg, 32, 0.5);
  for (int s = 0; s <= 10; ++s)
    EXPECT_NEAR(res.sol.solution.evaluate(s / 10.0), 0.0, 1e-13);
}

TEST(Solve, FallbackToUniformWhenTauTooWide) {
  ExperimentConfig cfg = preset_config("two-exp-layer-tpp");
  cfg.reference = "none";
  // eps = 0.3: tau0 = 2 sqrt(0.3)/sqrt(2) ln N > 1/4 -> uniform fallback.
  const Mesh mesh = run_mesh(cfg, 64, 0.3);
  EXPECT_EQ(mesh.generator, "uniform");
  EXPECT_NE(mesh.segments[0].note.find("fallback"), std::string::npos);
  const SolveRunResult res = run_solve(cfg, 64, 0.3);
  EXPECT_EQ(res.sol.solution.space().mesh().generator, "uniform");
}

TEST(Solve, SemilinearPresetNewton) {
  ExperimentConfig cfg = preset_config("manufactured-semilinear");
  const SolveRunResult res = run_solve(cfg, 64, 1e-4);
  ASSERT_TRUE(res.report.has_value());
  EXPECT_LE(res.sol.newton.iterations, 8);
  EXPECT_LT(res.report->max, 1e-3);
}

TEST(Solve, NonHomogeneousBoundaryValues) {
  ExperimentConfig cfg;
  cfg.b_expr = "1";
  cfg.c_expr = "2";
  cfg.rhs_expr = "1";
  cfg.nu_minus = 1.0;
  cfg.nu_plus = -2.0;
  cfg.reference = "none";
  cfg.mesh_kind = "uniform";
  const SolveRunResult res = run_solve(cfg, 64, 0.1);
  EXPECT_DOUBLE_EQ(res.sol.solution.evaluate(0.0), 1.0);
  EXPECT_DOUBLE_EQ(res.sol.solution.evaluate(1.0), -2.0);
}

// ---------------------------------------------------------------------------

TEST(Convergence, CsvSchemaAndRates) {
  ExperimentConfig cfg = preset_config("manufactured-linear");
  cfg.k = 1;
  cfg.mesh_kind = "uniform";
  cfg.n_values = {16, 32, 64};
  cfg.eps_values = {1.0};
  const SweepResult sweep = run_convergence(cfg);

  std::istringstream lines(sweep.csv);
  std::string header;
  std::getline(lines, header);
  EXPECT_EQ(header, "N,eps,energy,l2,h1,max,rate_plain,rate_lnadj,seconds");

  ASSERT_EQ(sweep.records.size(), 3u);
  EXPECT_FALSE(sweep.records[0].has_rates);
  EXPECT_TRUE(sweep.records[1].has_rates);
  // definitional stepwise rate
  const auto& r0 = sweep.records[0];
  const auto& r1 = sweep.records[1];
  const double expect_rate =
      std::log(r0.err.energy / r1.err.energy) /
      std::log((std::log(16.0) / 16.0) / (std::log(32.0) / 32.0));
  EXPECT_NEAR(r1.rate_lnadj, expect_rate, 1e-12);
  // smooth problem at eps=1: plain energy order ~ k
  ASSERT_EQ(sweep.fitted_plain.size(), 1u);
  EXPECT_NEAR(sweep.fitted_plain[0], 1.0, 0.1);
  EXPECT_FALSE(sweep.uniform_errors.empty());
}

TEST(Convergence, DeterministicModuloSeconds) {
  ExperimentConfig cfg = preset_config("rep-bou-tpp");
  cfg.k = 1;
  cfg.n_values = {16, 32, 64};
  cfg.eps_values = {1e-4, 1e-6};
  cfg.ref_multiplier = 2;
  const SweepResult a = run_convergence(cfg);
  const SweepResult b = run_convergence(cfg);

  auto strip_seconds = [](const std::string& csv) {
    std::istringstream in(csv);
    std::ostringstream out;
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line[0] != '#') {
        const std::size_t last = line.rfind(',');
        if (last != std::string::npos) line = line.substr(0, last);
      }
      out << line << '\n';
    }
    return out.str();
  };
  EXPECT_EQ(strip_seconds(a.csv), strip_seconds(b.csv));
}

TEST(Convergence, PartialFailureKeepsTable) {
  ExperimentConfig cfg = preset_config("rep-bou-tpp");
  cfg.k = 1;
  cfg.reference = "none";  // not a sweep strategy: rows fail, table persists
  cfg.n_values = {16, 32, 64};
  cfg.eps_values = {1e-4};
  const SweepResult sweep = run_convergence(cfg);
  EXPECT_EQ(sweep.records.size(), 3u);
  for (const auto& rec : sweep.records) EXPECT_FALSE(rec.failure.empty());
  EXPECT_NE(sweep.csv.find("# row failed"), std::string::npos);
}

TEST(Convergence, RequiresThreeNs) {
  ExperimentConfig cfg = preset_config("manufactured-linear");
  cfg.n_values = {16, 32};
  EXPECT_THROW(run_convergence(cfg), ConfigError);
}

// ---------------------------------------------------------------------------

TEST(MeshDump, DeterministicBytesWithHeaderAndMarkers) {
  ExperimentConfig cfg = preset_config("rep-bou-tpp");
  const Mesh mesh = run_mesh(cfg, 64, 1e-6);
  const std::string dump = mesh_dump(mesh);
  EXPECT_EQ(dump, mesh_dump(run_mesh(cfg, 64, 1e-6)));  // byte-identical
  EXPECT_NE(dump.find("\"generator\""), std::string::npos);
  EXPECT_NE(dump.find("power"), std::string::npos);
  EXPECT_NE(dump.find("0x"), std::string::npos);

  // hexfloat round trip is exact
  std::istringstream in(dump);
  std::string line;
  std::size_t idx = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const double v = std::strtod(line.c_str(), nullptr);
    ASSERT_LT(idx, mesh.points.size());
    EXPECT_EQ(v, mesh.points[idx]) << "line " << line;
    ++idx;
  }
  EXPECT_EQ(idx, mesh.points.size());
}

TEST(MeshDump, SunStynesMarkersCount) {
  ExperimentConfig cfg = preset_config("int-bou-tpp");
  const Mesh mesh = run_mesh(cfg, 64, 1e-6);
  EXPECT_EQ(mesh.segments.size(), 3u);
  const std::string dump = mesh_dump(mesh);
  EXPECT_NE(dump.find("\"segments\""), std::string::npos);
}

TEST(SolutionDump, DeterministicAndContainsNodes) {
  ExperimentConfig cfg = preset_config("manufactured-linear");
  cfg.k = 2;
  cfg.mesh_kind = "uniform";
  const SolveRunResult a = run_solve(cfg, 16, 1.0);
  const SolveRunResult b = run_solve(cfg, 16, 1.0);
  EXPECT_EQ(a.dump, b.dump);
  // node samples present: the Gauss-Lobatto midpoint of the first cell
  std::istringstream in(a.dump);
  std::string line;
  std::getline(in, line);  // header
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  // per cell: k nodes + (m-1) uniform interior points, plus the right end
  EXPECT_EQ(rows, 16 * (2 + 3) + 1);
}

TEST(MeshDump, UniformFallbackEquallySpaced) {
  ExperimentConfig cfg = preset_config("two-exp-layer-tpp");
  const Mesh mesh = run_mesh(cfg, 32, 0.4);
  ASSERT_EQ(mesh.points.size(), 33u);
  for (std::size_t i = 0; i < mesh.points.size(); ++i)
    EXPECT_NEAR(mesh.points[i], static_cast<double>(i) / 32.0, 1e-15);
}

TEST(Reference, NestedSelfTest) {
  // the fine-mesh reference, measured against a doubly-fine reference, sits
  // far below the coarsest study error (factor >= 10)
  ExperimentConfig cfg = preset_config("rep-bou-tpp");
  cfg.k = 1;
  const double eps = 1e-4;
  const int coarse_n = 32, ref_n = 4 * 128;
  const BoundaryValueProblem prob = build_problem(cfg, eps);

  auto solve_at = [&](int n, int order) {
    ExperimentConfig c = cfg;
    c.rho = 0.0;
    const Mesh mesh = build_mesh(c, prob, n, eps, order);
    return solve_problem(prob, mesh, order).solution;
  };
  const DiscreteFunction ref = solve_at(ref_n, 2);
  const DiscreteFunction ref2 = solve_at(2 * ref_n, 2);
  const DiscreteFunction coarse = solve_at(coarse_n, 1);

  const Reference against_ref2 = make_fine_mesh_reference(ref2);
  const double ref_err =
      error_norms(ref, against_ref2, eps, prob.gamma_tilde).energy;
  const Reference against_ref = make_fine_mesh_reference(ref);
  const double study_err =
      error_norms(coarse, against_ref, eps, prob.gamma_tilde).energy;
  EXPECT_GE(study_err, 10.0 * ref_err)
      << "study=" << study_err << " ref=" << ref_err;
}

TEST(Classify, AttractiveMultiplePreset) {
  ExperimentConfig cfg = preset_config("att-mult-bou-tpp");
  const BoundaryValueProblem prob = build_problem(cfg, 1e-8);
  const LayerMap lm = classify_layers(prob, 1);
  // attractive boundary point at 0 (power), multiple point at 1 with a
  // sqrt(eps)-width layer, beta = sqrt(c(1)) = sqrt(3)
  ASSERT_EQ(lm.pow_boundary.size(), 1u);
  EXPECT_DOUBLE_EQ(lm.pow_boundary[0].location, 0.0);
  EXPECT_NEAR(lm.pow_boundary[0].b_prime, -1.0, 1e-12);
  ASSERT_EQ(lm.exp_boundary.size(), 1u);
  EXPECT_DOUBLE_EQ(lm.exp_boundary[0].location, 1.0);
  EXPECT_TRUE(lm.exp_boundary[0].sqrt_width);
  EXPECT_NEAR(lm.exp_boundary[0].beta, std::sqrt(3.0), 1e-12);
  bool attractive = false;
  for (const auto& tp : lm.turning_points)
    if (tp.kind == TurningPointKind::BoundaryAttractive) attractive = true;
  EXPECT_TRUE(attractive);
}

TEST(Convergence, BakhvalovGeneratorEndToEnd) {
  // alternative generating function through the full pipeline: plain order
  // ~ k without the log factor
  ExperimentConfig cfg = preset_config("rep-bou-tpp");
  cfg.k = 1;
  cfg.generator = "bakhvalov-s";
  cfg.n_values = {32, 64, 128, 256};
  cfg.eps_values = {1e-6};
  const SweepResult sweep = run_convergence(cfg);
  for (const auto& rec : sweep.records)
    ASSERT_TRUE(rec.failure.empty()) << rec.failure;
  EXPECT_GE(sweep.fitted_plain[0], 0.85);
}

TEST(PresetMeshes, MatchPaperFormulas) {
  // two-exp-layer preset at N=16, eps=1e-6, rho=2 against hand evaluation
  ExperimentConfig cfg = preset_config("two-exp-layer-tpp");
  cfg.rho = 2.0;
  const Mesh mesh = run_mesh(cfg, 16, 1e-6);
  const double beta0 = std::sqrt(2.0);  // sqrt(c(0)) with the preset's c = 2
  const double lnn = std::log(16.0);
  for (int i = 0; i <= 4; ++i) {
    const double expect =
        2.0 * (std::sqrt(1e-6) / beta0) * (2.0 * (2.0 * i / 16.0) * lnn);
    EXPECT_NEAR(mesh.points[i], expect, 1e-21) << i;
  }
}

}  // namespace
