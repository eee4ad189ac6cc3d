#pragma once

// Configuration-driven experiment harness: problem presets, config parsing,
// single solves, (N, eps) convergence sweeps with CSV output, and the mesh
// dump format used as golden-test fixtures.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "layerfem/norms.hpp"
#include "layerfem/problem.hpp"
#include "layerfem/transform.hpp"

namespace layerfem {

struct ConfigError : Error {
  using Error::Error;
};

// ---------------------------------------------------------------------------

struct ExperimentConfig {
  // [problem]
  std::string preset;  // empty: explicit fields below
  double a = 0.0, b_end = 1.0;
  std::string b_expr, c_expr = "1", rhs_expr = "0";
  std::string f_expr;        // semilinear f(x,u); non-empty selects semilinear
  std::string c_lower_expr;  // optional lower bound for df/du
  double nu_minus = 0.0, nu_plus = 0.0;
  double gamma = 1.0, gamma_tilde = 1.0;
  std::map<std::string, double> parameters;

  // [discretization]
  int k = 1;
  std::vector<int> n_values = {64};
  std::vector<double> eps_values = {1e-6};
  double rho = 0.0;  // 0: default k+1
  double mu = 0.9;
  std::string generator = "shishkin";
  std::string node_rule = "gauss-lobatto";
  std::string mesh_kind = "auto";  // auto | uniform

  // [reference]
  std::string reference = "fine-mesh";  // fine-mesh | exact | none
  std::string exact_u, exact_du;
  int ref_multiplier = 4;

  // [output]
  std::string out_path;
  unsigned long seed = 42;
  int dump_points_per_cell = 4;

  double effective_rho(int order) const {
    return rho > 0.0 ? rho : order + 1.0;
  }
};

// ---------------------------------------------------------------------------
// Presets. a(x) is fixed to 1; c chosen so the assumption margins are
// visible in check_assumptions output.

inline std::vector<std::string> preset_names() {
  return {"rep-bou-tpp", "att-mult-bou-tpp", "int-bou-tpp",
          "two-exp-layer-tpp", "manufactured-linear",
          "manufactured-semilinear"};
}

namespace harness_detail {

// rhs for a manufactured linear problem -eps u'' + b u' + c u = f with the
// exact solution u*; "eps" stays symbolic so one expression serves a sweep.
inline Expr manufactured_rhs(const Expr& u_star, const Expr& b, const Expr& c) {
  const Expr du = differentiate(u_star, "x");
  const Expr d2u = differentiate(du, "x");
  return Expr::number(0.0) - Expr::symbol("eps") * d2u + b * du + c * u_star;
}

}  // namespace harness_detail

inline void apply_preset(ExperimentConfig& cfg) {
  if (cfg.preset.empty()) return;
  const std::string& p = cfg.preset;
  if (p == "rep-bou-tpp") {
    cfg.a = 0.0;
    cfg.b_end = 1.0;
    cfg.b_expr = "x";
    cfg.c_expr = "2";
    cfg.rhs_expr = "1";
    cfg.gamma = 2.0;
    cfg.gamma_tilde = 1.5;
  } else if (p == "att-mult-bou-tpp") {
    cfg.a = 0.0;
    cfg.b_end = 1.0;
    cfg.b_expr = "-x*(1-x)^2";
    cfg.c_expr = "2+x";
    cfg.rhs_expr = "1";
    cfg.gamma = 2.0;
    cfg.gamma_tilde = 1.8;
  } else if (p == "int-bou-tpp") {
    cfg.a = -1.0;
    cfg.b_end = 1.0;
    cfg.b_expr = "-(x+1)*x*(x-1/2)*(x-27/30)^3";
    cfg.c_expr = "6";
    // rhs vanishes at the inflow boundary x = 1 so the boundary condition is
    // compatible with the reduced solution there; b(1) = -1e-3 makes the
    // inflow relaxation width |b(1)|/c otherwise far below mesh resolution.
    cfg.rhs_expr = "1-x";
    cfg.gamma = 6.0;
    cfg.gamma_tilde = 0.8;
  } else if (p == "two-exp-layer-tpp") {
    cfg.a = 0.0;
    cfg.b_end = 1.0;
    cfg.b_expr = "x^2";
    cfg.c_expr = "2";
    cfg.rhs_expr = "1";
    cfg.gamma = 2.0;
    cfg.gamma_tilde = 1.0;
  } else if (p == "manufactured-linear") {
    cfg.a = 0.0;
    cfg.b_end = 1.0;
    cfg.b_expr = "1";
    cfg.c_expr = "1";
    cfg.rhs_expr = "";  // built symbolically below
    cfg.gamma = 1.0;
    cfg.gamma_tilde = 1.0;
    cfg.reference = "exact";
    cfg.exact_u = "sin(pi*x)";
  } else if (p == "manufactured-semilinear") {
    cfg.a = 0.0;
    cfg.b_end = 1.0;
    cfg.b_expr = "0";
    cfg.f_expr = "";  // built symbolically below
    cfg.gamma = 1.0;
    cfg.gamma_tilde = 1.0;
    cfg.reference = "exact";
    cfg.exact_u = "sin(pi*x)";
  } else {
    throw ConfigError("unknown preset '" + p + "'");
  }
}

inline BoundaryValueProblem build_problem(const ExperimentConfig& cfg,
                                          double eps) {
  BoundaryValueProblem prob;
  prob.a = cfg.a;
  prob.b_end = cfg.b_end;
  prob.eps = eps;
  prob.nu_minus = cfg.nu_minus;
  prob.nu_plus = cfg.nu_plus;
  prob.gamma = cfg.gamma;
  prob.gamma_tilde = cfg.gamma_tilde;
  prob.parameters = cfg.parameters;
  prob.b = parse_expression(cfg.b_expr.empty() ? "0" : cfg.b_expr);

  if (cfg.preset == "manufactured-linear") {
    prob.c = parse_expression(cfg.c_expr);
    prob.rhs = harness_detail::manufactured_rhs(
        parse_expression(cfg.exact_u), prob.b, prob.c);
    return prob;
  }
  if (cfg.preset == "manufactured-semilinear") {
    // f(x,u) = u + u^3 - g(x) with g manufactured from u*.
    const Expr u_star = parse_expression(cfg.exact_u);
    const Expr du = differentiate(u_star, "x");
    const Expr d2u = differentiate(du, "x");
    const Expr g = Expr::number(0.0) - Expr::symbol("eps") * d2u + u_star +
                   u_star * u_star * u_star;
    const Expr u_sym = Expr::symbol("u");
    prob.semilinear = true;
    prob.f_semilinear = u_sym + u_sym * u_sym * u_sym - g;
    return prob;
  }

  if (!cfg.f_expr.empty()) {
    prob.semilinear = true;
    prob.f_semilinear = parse_expression(cfg.f_expr);
    if (!cfg.c_lower_expr.empty())
      prob.c_lower = parse_expression(cfg.c_lower_expr);
  } else {
    prob.c = parse_expression(cfg.c_expr);
    prob.rhs = parse_expression(cfg.rhs_expr.empty() ? "0" : cfg.rhs_expr);
  }
  return prob;
}

// ---------------------------------------------------------------------------
// Mesh selection: preset formulas where defined, the composite strategy
// otherwise, with the uniform fallback handled inside general_layer_mesh.

inline Mesh build_mesh(const ExperimentConfig& cfg,
                       const BoundaryValueProblem& prob, int n, double eps,
                       int order) {
  const double rho = cfg.effective_rho(order);
  const MeshGenFunction gen = MeshGenFunction::from_name(cfg.generator);
  if (cfg.mesh_kind == "uniform") return uniform_mesh(prob.a, prob.b_end, n);
  if (cfg.mesh_kind != "auto")
    throw ConfigError("unknown mesh kind '" + cfg.mesh_kind + "'");

  if (cfg.preset == "rep-bou-tpp") {
    const double beta = prob.eval_b(1.0);  // = a(1)
    const double tau = rho * (eps / beta) * std::log(static_cast<double>(n));
    if (tau > 0.5) return uniform_mesh(0.0, 1.0, n, "fallback: tau > 1/2");
    return mesh_power_left_exp_right(eps, eps, beta, rho, order, n, gen);
  }
  if (cfg.preset == "att-mult-bou-tpp") {
    const double beta = std::sqrt(prob.eval_c(1.0));
    const double tau =
        rho * (std::sqrt(eps) / beta) * std::log(static_cast<double>(n));
    if (tau > 0.5) return uniform_mesh(0.0, 1.0, n, "fallback: tau > 1/2");
    return mesh_power_left_exp_right(eps, std::sqrt(eps), beta, rho, order, n,
                                     gen);
  }
  if (cfg.preset == "int-bou-tpp") {
    // The interior point is outside M_k at desk-scale k, so the conservative
    // lambda_1 = 0 grading is used.
    return mesh_interior_power(eps, 0.0, order, n);
  }
  if (cfg.preset == "two-exp-layer-tpp") {
    const double beta0 = std::sqrt(prob.eval_c(0.0));
    const double beta1 = prob.eval_b(1.0);
    const double lnn = std::log(static_cast<double>(n));
    const double tau0 = rho * std::sqrt(eps) / beta0 * lnn;
    const double tau1 = rho * eps / beta1 * lnn;
    if (std::max(tau0, tau1) > 0.25)
      return uniform_mesh(0.0, 1.0, n,
                          "fallback: transition widths exceed 1/4");
    return mesh_two_exp_layers(eps, beta0, beta1, rho, n, gen);
  }

  // General strategy from the classified layer map.
  const LayerMap lm = classify_layers(prob, order);
  return general_layer_mesh(to_region_spec(lm, cfg.mu), eps, n, order, rho,
                            gen, prob.a, prob.b_end);
}

// ---------------------------------------------------------------------------
// Solving a problem on a mesh (homogenize, then linear solve or Newton).

struct SolveOutput {
  DiscreteFunction solution;  // includes the affine lift (original BCs)
  NewtonTrace newton;         // empty for linear problems
};

inline SolveOutput solve_problem(const BoundaryValueProblem& prob,
                                 const Mesh& mesh, int order,
                                 NodeRule rule = NodeRule::GaussLobatto,
                                 const NewtonOptions& newton_opts = {}) {
  const HomogenizedProblem hp = homogenize(prob);
  auto space = std::make_shared<FESpace>(mesh, order, rule);
  SolveOutput out;

  if (!prob.semilinear) {
    const auto& q = hp.problem;
    DiscreteFunction w =
        solve_linear(space, q.eps, q.b_field(), q.c_field(), q.rhs_field());
    std::vector<double> coeffs = w.coefficients();
    if (prob.nu_minus != 0.0 || prob.nu_plus != 0.0)
      for (std::size_t d = 0; d < coeffs.size(); ++d)
        coeffs[d] += hp.lift(space->node_position(d + 1));
    out.solution = DiscreteFunction(space, std::move(coeffs), prob.nu_minus,
                                    prob.nu_plus);
    return out;
  }

  const BoundaryValueProblem& q = hp.problem;
  const Expr fu = differentiate(q.f_semilinear, "u");
  SemilinearForm form;
  form.eps = q.eps;
  form.b = q.b_field();
  form.f = [q](double x, double u) { return q.eval_f(x, u); };
  form.fu = [q, fu](double x, double u) {
    Bindings env = q.base_bindings();
    env["x"] = x;
    env["u"] = u;
    return fu.eval(env);
  };
  DiscreteFunction zero(space, std::vector<double>(space->dof_count(), 0.0));
  NewtonResult nr = solve_semilinear(space, form, zero, newton_opts);
  if (!nr.trace.converged)
    throw SolveError("Newton did not converge: " + nr.trace.message);
  std::vector<double> coeffs = nr.solution.coefficients();
  if (prob.nu_minus != 0.0 || prob.nu_plus != 0.0)
    for (std::size_t d = 0; d < coeffs.size(); ++d)
      coeffs[d] += hp.lift(space->node_position(d + 1));
  out.solution = DiscreteFunction(space, std::move(coeffs), prob.nu_minus,
                                  prob.nu_plus);
  out.newton = nr.trace;
  return out;
}

// Reference for a config at one eps. The fine-mesh family solver rebuilds
// the mesh with the reference order and rho = order+1.
inline Reference build_reference(const ExperimentConfig& cfg, double eps,
                                 int largest_n) {
  if (cfg.reference == "exact") {
    const Expr u = parse_expression(cfg.exact_u);
    const Expr du = cfg.exact_du.empty() ? differentiate(u, "x")
                                         : parse_expression(cfg.exact_du);
    auto params = cfg.parameters;
    return make_exact_reference(
        [u, eps, params](double x) {
          Bindings env(params.begin(), params.end());
          env["eps"] = eps;
          env["x"] = x;
          return u.eval(env);
        },
        [du, eps, params](double x) {
          Bindings env(params.begin(), params.end());
          env["eps"] = eps;
          env["x"] = x;
          return du.eval(env);
        },
        "exact " + cfg.exact_u);
  }
  if (cfg.reference == "fine-mesh") {
    auto family = [&cfg, eps](int n, int order) {
      ExperimentConfig ref_cfg = cfg;
      ref_cfg.rho = 0.0;  // default to order+1 for the reference order
      const BoundaryValueProblem prob = build_problem(ref_cfg, eps);
      const Mesh mesh = build_mesh(ref_cfg, prob, n, eps, order);
      return solve_problem(prob, mesh, order,
                           node_rule_from_name(ref_cfg.node_rule))
          .solution;
    };
    return make_reference(family, largest_n, cfg.k, cfg.ref_multiplier);
  }
  throw ConfigError("unknown reference strategy '" + cfg.reference + "'");
}

// ---------------------------------------------------------------------------
// Convergence sweep.

struct ConvergenceRecord {
  int n = 0;
  double eps = 0.0;
  ErrorReport err;
  bool has_rates = false;
  double rate_plain = 0.0;
  double rate_lnadj = 0.0;
  double seconds = 0.0;
  std::string failure;  // non-empty when this row failed
};

struct SweepResult {
  std::vector<ConvergenceRecord> records;  // ordered by (eps, N)
  // Fitted ln-adjusted / plain orders per eps, ordered as eps_values.
  std::vector<double> fitted_lnadj, fitted_plain;
  // eps-uniformity: max-over-eps energy error per N, and its fitted order.
  std::vector<double> uniform_errors;
  double uniform_fitted_lnadj = 0.0;
  std::string csv;
};

namespace harness_detail {

inline std::string format_double(double v, const char* fmt = "%.12e") {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

}  // namespace harness_detail

inline SweepResult run_convergence(const ExperimentConfig& cfg) {
  if (cfg.n_values.size() < 3)
    throw ConfigError("convergence sweep needs at least 3 values of N");
  SweepResult out;
  std::ostringstream csv;
  csv << "N,eps,energy,l2,h1,max,rate_plain,rate_lnadj,seconds\n";

  for (double eps : cfg.eps_values) {
    Reference ref;
    std::string ref_failure;
    try {
      ref = build_reference(cfg, eps, *std::max_element(cfg.n_values.begin(),
                                                        cfg.n_values.end()));
    } catch (const std::exception& e) {
      ref_failure = e.what();
    }
    const ConvergenceRecord* prev = nullptr;
    std::vector<double> metrics, errors;
    for (int n : cfg.n_values) {
      ConvergenceRecord rec;
      rec.n = n;
      rec.eps = eps;
      try {
        if (!ref_failure.empty())
          throw ConfigError("reference unavailable: " + ref_failure);
        const BoundaryValueProblem prob = build_problem(cfg, eps);
        const auto t0 = std::chrono::steady_clock::now();
        const Mesh mesh = build_mesh(cfg, prob, n, eps, cfg.k);
        const SolveOutput sol = solve_problem(
            prob, mesh, cfg.k, node_rule_from_name(cfg.node_rule));
        const auto t1 = std::chrono::steady_clock::now();
        rec.seconds = std::chrono::duration<double>(t1 - t0).count();
        rec.err = error_norms(sol.solution, ref, eps, prob.gamma_tilde);
        if (prev && prev->failure.empty()) {
          rec.has_rates = true;
          rec.rate_plain =
              stepwise_rate(prev->err.energy, rec.err.energy,
                            metric_plain(prev->n), metric_plain(n));
          rec.rate_lnadj =
              stepwise_rate(prev->err.energy, rec.err.energy,
                            metric_ln_adjusted(prev->n), metric_ln_adjusted(n));
        }
        metrics.push_back(metric_ln_adjusted(n));
        errors.push_back(rec.err.energy);
      } catch (const std::exception& e) {
        rec.failure = e.what();
      }
      out.records.push_back(rec);
      prev = &out.records.back();

      if (!rec.failure.empty()) {
        csv << rec.n << ',' << harness_detail::format_double(eps, "%.6g")
            << ",,,,,,,\n"
            << "# row failed: " << rec.failure << '\n';
        continue;
      }
      csv << rec.n << ',' << harness_detail::format_double(eps, "%.6g") << ','
          << harness_detail::format_double(rec.err.energy) << ','
          << harness_detail::format_double(rec.err.l2) << ','
          << harness_detail::format_double(rec.err.h1_semi) << ','
          << harness_detail::format_double(rec.err.max) << ',';
      if (rec.has_rates)
        csv << harness_detail::format_double(rec.rate_plain, "%.4f") << ','
            << harness_detail::format_double(rec.rate_lnadj, "%.4f");
      else
        csv << ',';
      csv << ',' << harness_detail::format_double(rec.seconds, "%.3f") << '\n';
    }
    if (metrics.size() >= 2) {
      std::vector<double> pm, em;
      for (const auto& r : out.records)
        if (r.eps == eps && r.failure.empty()) {
          pm.push_back(metric_plain(r.n));
          em.push_back(r.err.energy);
        }
      out.fitted_lnadj.push_back(fit_order(metrics, errors));
      out.fitted_plain.push_back(fit_order(pm, em));
      csv << "# fit eps=" << harness_detail::format_double(eps, "%.6g")
          << " order_lnadj="
          << harness_detail::format_double(out.fitted_lnadj.back(), "%.4f")
          << " order_plain="
          << harness_detail::format_double(out.fitted_plain.back(), "%.4f")
          << '\n';
    } else {
      out.fitted_lnadj.push_back(std::nan(""));
      out.fitted_plain.push_back(std::nan(""));
    }
  }

  // eps-uniformity rows: worst energy error over eps at each N.
  std::vector<double> uni_metric;
  for (int n : cfg.n_values) {
    double worst = 0.0;
    bool any = false;
    for (const auto& r : out.records)
      if (r.n == n && r.failure.empty()) {
        worst = std::max(worst, r.err.energy);
        any = true;
      }
    if (any) {
      out.uniform_errors.push_back(worst);
      uni_metric.push_back(metric_ln_adjusted(n));
      csv << "# uniform N=" << n
          << " max_energy=" << harness_detail::format_double(worst) << '\n';
    }
  }
  if (uni_metric.size() >= 2) {
    out.uniform_fitted_lnadj = fit_order(uni_metric, out.uniform_errors);
    csv << "# uniform fit order_lnadj="
        << harness_detail::format_double(out.uniform_fitted_lnadj, "%.4f")
        << '\n';
  }
  out.csv = csv.str();
  return out;
}

// ---------------------------------------------------------------------------
// classify / solve / mesh front ends.

inline std::string run_classify(const ExperimentConfig& cfg, double eps) {
  const BoundaryValueProblem prob = build_problem(cfg, eps);
  const LayerMap lm = classify_layers(prob, cfg.k);
  std::ostringstream os;

  std::vector<std::string> summary;
  for (const auto& pb : lm.pow_boundary) {
    std::ostringstream s;
    s << "power layer at " << pb.location;
    summary.push_back(s.str());
  }
  for (const auto& e : lm.exp_boundary) {
    std::ostringstream s;
    s << "exponential layer (" << (e.sqrt_width ? "sqrt(eps)" : "eps")
      << "-width, beta=" << e.beta << ") at " << e.location;
    summary.push_back(s.str());
  }
  for (const auto& ip : lm.interior) {
    std::ostringstream s;
    s << "interior layer at " << ip.location << " (lambda cap=" << ip.lambda_cap
      << (ip.in_m_k ? ", in M_k" : "") << ")";
    summary.push_back(s.str());
  }
  if (summary.empty()) summary.push_back("no layers");
  for (std::size_t i = 0; i < summary.size(); ++i)
    os << summary[i] << (i + 1 < summary.size() ? "; " : "\n");

  os << "turning points:\n";
  for (const auto& tp : lm.turning_points) {
    os << "  x=" << tp.location << "  " << turning_point_kind_name(tp.kind)
       << "  b'=" << tp.b_prime << "  c=" << tp.c_value;
    if (tp.lambda_cap) os << "  lambda_cap=" << *tp.lambda_cap;
    os << '\n';
  }
  for (const auto& e : lm.exp_boundary)
    os << "  exp layer at " << e.location << ": delta=" << e.delta
       << " delta_k=" << e.delta_k << " typical width=" << e.typical_width
       << '\n';
  return os.str();
}

struct SolveRunResult {
  SolveOutput sol;
  std::optional<ErrorReport> report;
  std::string dump;  // (x, u) samples, nodes plus uniform points per cell
};

inline SolveRunResult run_solve(const ExperimentConfig& cfg, int n,
                                double eps) {
  const BoundaryValueProblem prob = build_problem(cfg, eps);
  const Mesh mesh = build_mesh(cfg, prob, n, eps, cfg.k);
  SolveRunResult out;
  out.sol = solve_problem(prob, mesh, cfg.k,
                          node_rule_from_name(cfg.node_rule));

  if (cfg.reference != "none") {
    Reference ref = build_reference(cfg, eps, n);
    out.report = error_norms(out.sol.solution, ref, eps, prob.gamma_tilde);
  }

  std::ostringstream os;
  os << "# x u\n";
  const FESpace& space = out.sol.solution.space();
  const int m = std::max(1, cfg.dump_points_per_cell);
  for (std::size_t cell = 0; cell < space.cells(); ++cell) {
    const double x0 = space.mesh().points[cell];
    const double h = space.mesh().h(cell);
    // element nodes plus m uniform points per cell, ascending, deduplicated
    std::vector<double> xs;
    for (int j = 0; j < space.order(); ++j)
      xs.push_back(x0 + h * space.reference_nodes()[j]);
    for (int s = 1; s < m; ++s) xs.push_back(x0 + h * s / m);
    std::sort(xs.begin(), xs.end());
    if (cell + 1 == space.cells()) xs.push_back(space.mesh().points.back());
    for (double x : xs)
      os << harness_detail::format_double(x, "%.17g") << ' '
         << harness_detail::format_double(out.sol.solution.evaluate(x),
                                          "%.17g")
         << '\n';
  }
  out.dump = os.str();
  return out;
}

// Mesh dump: a JSON-like provenance header, then one point per line in
// hexadecimal-float precision. Byte-for-byte deterministic.
inline std::string mesh_dump(const Mesh& mesh) {
  std::ostringstream os;
  os << "# layerfem mesh\n";
  os << "# {\"generator\":\"" << mesh.generator << "\",\"params\":{";
  bool first = true;
  for (const auto& [key, value] : mesh.params) {
    if (!first) os << ',';
    first = false;
    os << '"' << key << "\":" << harness_detail::format_double(value, "%.17g");
  }
  os << "},\"segments\":[";
  first = true;
  for (const auto& seg : mesh.segments) {
    if (!first) os << ',';
    first = false;
    os << "{\"kind\":\"" << segment_kind_name(seg.kind)
       << "\",\"first_cell\":" << seg.first_cell
       << ",\"cells\":" << seg.cell_count << ",\"note\":\"" << seg.note
       << "\"}";
  }
  os << "]}\n";
  for (double x : mesh.points)
    os << harness_detail::format_double(x, "%a") << '\n';
  return os.str();
}

inline Mesh run_mesh(const ExperimentConfig& cfg, int n, double eps) {
  const BoundaryValueProblem prob = build_problem(cfg, eps);
  return build_mesh(cfg, prob, n, eps, cfg.k);
}

// ---------------------------------------------------------------------------
// Config file parsing: flat key = value lines under [section] headers,
// expressions in double quotes, lists space- or comma-separated.

namespace harness_detail {

inline std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  std::size_t e = s.find_last_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  return s.substr(b, e - b + 1);
}

inline std::string unquote(const std::string& s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"')
    return s.substr(1, s.size() - 2);
  return s;
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> items;
  std::string cur;
  for (char c : s) {
    if (c == ',' || c == ' ' || c == '\t') {
      if (!cur.empty()) items.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) items.push_back(cur);
  return items;
}

inline double parse_number(const std::string& s, const std::string& key) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("bad numeric value '" + s + "' for key '" + key + "'");
  }
}

}  // namespace harness_detail

inline void validate_config(const ExperimentConfig& cfg) {
  if (cfg.n_values.empty()) throw ConfigError("N list must be nonempty");
  if (cfg.eps_values.empty()) throw ConfigError("eps list must be nonempty");
  for (double e : cfg.eps_values)
    if (!(e > 0.0)) throw ConfigError("eps values must be positive");
  if (cfg.k < 1) throw ConfigError("k must be >= 1");
  const bool needs_even =
      cfg.mesh_kind == "auto" && (cfg.preset != "manufactured-linear");
  for (int n : cfg.n_values) {
    if (n < 2) throw ConfigError("N values must be >= 2");
    if (needs_even && n % 2 != 0)
      throw ConfigError("N = " + std::to_string(n) +
                        " must be even for layer-adapted meshes");
  }
}

inline ExperimentConfig parse_config(const std::string& text) {
  using namespace harness_detail;
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("line " + std::to_string(lineno) +
                          ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) +
                        ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = unquote(trim(line.substr(eq + 1)));

    auto expect_section = [&](const char* wanted) {
      if (section != wanted)
        throw ConfigError("key '" + key + "' belongs in [" +
                          std::string(wanted) + "]");
    };

    if (key == "preset") {
      expect_section("problem");
      cfg.preset = value;
    } else if (key == "interval") {
      expect_section("problem");
      const auto parts = split_list(value);
      if (parts.size() != 2)
        throw ConfigError("interval needs two endpoints");
      cfg.a = parse_number(parts[0], key);
      cfg.b_end = parse_number(parts[1], key);
    } else if (key == "b") {
      expect_section("problem");
      cfg.b_expr = value;
    } else if (key == "c") {
      expect_section("problem");
      cfg.c_expr = value;
    } else if (key == "rhs") {
      expect_section("problem");
      cfg.rhs_expr = value;
    } else if (key == "f") {
      expect_section("problem");
      cfg.f_expr = value;
    } else if (key == "c_lower") {
      expect_section("problem");
      cfg.c_lower_expr = value;
    } else if (key == "nu_minus") {
      cfg.nu_minus = parse_number(value, key);
    } else if (key == "nu_plus") {
      cfg.nu_plus = parse_number(value, key);
    } else if (key == "gamma") {
      cfg.gamma = parse_number(value, key);
    } else if (key == "gamma_tilde") {
      cfg.gamma_tilde = parse_number(value, key);
    } else if (key.rfind("param.", 0) == 0) {
      cfg.parameters[key.substr(6)] = parse_number(value, key);
    } else if (key == "k") {
      cfg.k = static_cast<int>(parse_number(value, key));
    } else if (key == "N") {
      cfg.n_values.clear();
      for (const auto& item : split_list(value))
        cfg.n_values.push_back(static_cast<int>(parse_number(item, key)));
    } else if (key == "eps") {
      cfg.eps_values.clear();
      for (const auto& item : split_list(value))
        cfg.eps_values.push_back(parse_number(item, key));
    } else if (key == "rho") {
      cfg.rho = parse_number(value, key);
    } else if (key == "mu") {
      cfg.mu = parse_number(value, key);
    } else if (key == "generator") {
      cfg.generator = value;
    } else if (key == "node_rule") {
      cfg.node_rule = value;
    } else if (key == "mesh") {
      cfg.mesh_kind = value;
    } else if (key == "strategy") {
      expect_section("reference");
      cfg.reference = value;
    } else if (key == "exact_u") {
      cfg.exact_u = value;
    } else if (key == "exact_du") {
      cfg.exact_du = value;
    } else if (key == "ref_multiplier") {
      cfg.ref_multiplier = static_cast<int>(parse_number(value, key));
    } else if (key == "path") {
      expect_section("output");
      cfg.out_path = value;
    } else if (key == "seed") {
      cfg.seed = static_cast<unsigned long>(parse_number(value, key));
    } else if (key == "points_per_cell") {
      cfg.dump_points_per_cell = static_cast<int>(parse_number(value, key));
    } else {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
  apply_preset(cfg);
  validate_config(cfg);
  return cfg;
}

}  // namespace layerfem
