#pragma once

// Error measurement in the eps-weighted energy norm, L2, H1-seminorm and a
// sampled max-norm; interpolation-error studies for the layer lemmas;
// reference-solution management and rate fitting.

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "layerfem/fem.hpp"

namespace layerfem {

struct ErrorReport {
  double energy = 0.0;
  double l2 = 0.0;
  double h1_semi = 0.0;
  double max = 0.0;
  double eps = 0.0;
  double gamma_tilde = 0.0;
  int quad_points = 0;
  std::string reference_note;
};

struct Reference {
  ScalarField value;
  ScalarField derivative;
  std::string provenance;
};

inline Reference make_exact_reference(ScalarField value, ScalarField derivative,
                                      std::string note = "exact") {
  return {std::move(value), std::move(derivative), std::move(note)};
}

inline Reference make_fine_mesh_reference(DiscreteFunction fine,
                                          std::string note = "fine-mesh") {
  auto holder = std::make_shared<DiscreteFunction>(std::move(fine));
  return {[holder](double x) { return holder->evaluate(x, 0); },
          [holder](double x) { return holder->evaluate(x, 1); },
          std::move(note)};
}

// Fine-mesh reference policy: same mesh family (supplied as a solver over
// (N, order)), N_ref = multiplier * largest study N, order k+1.
inline Reference make_reference(
    const std::function<DiscreteFunction(int n, int order)>& family_solver,
    int largest_study_n, int k, int multiplier = 4) {
  const int n_ref = multiplier * largest_study_n;
  DiscreteFunction fine = family_solver(n_ref, k + 1);
  return make_fine_mesh_reference(
      std::move(fine), "fine-mesh N=" + std::to_string(n_ref) +
                           " order=" + std::to_string(k + 1));
}

// ---------------------------------------------------------------------------
// Norms of u_N - ref, integrated cellwise on u_N's own mesh. The max norm is
// sampled at quadrature points, nodes, and 16 extra uniform points per cell
// (a lower bound on the true sup).

inline ErrorReport error_norms(const DiscreteFunction& u, const Reference& ref,
                               double eps, double gamma_tilde,
                               int quad_points_per_cell = 0) {
  const FESpace& space = u.space();
  const int k = space.order();
  if (quad_points_per_cell <= 0) quad_points_per_cell = 2 * k + 2;
  if (quad_points_per_cell < k + 2)
    throw Error("error_norms: quadrature must use at least k+2 points");
  const CellQuadrature cq = build_cell_quadrature(space, quad_points_per_cell);

  double l2_sq = 0.0, h1_sq = 0.0, vmax = 0.0;
  const int qn = quad_points_per_cell;
  for (std::size_t cell = 0; cell < space.cells(); ++cell) {
    const double h = space.mesh().h(cell);
    const double x0 = space.mesh().points[cell];
    for (int q = 0; q < qn; ++q) {
      const double x = x0 + h * cq.rule.points[q];
      double uval = 0.0, uder = 0.0;
      for (int j = 0; j <= k; ++j) {
        const double c = u.node_value(space.global_node(cell, j));
        uval += c * cq.val[q][j];
        uder += c * cq.der[q][j] / h;
      }
      const double ev = uval - ref.value(x);
      const double ed = uder - ref.derivative(x);
      const double w = cq.rule.weights[q] * h;
      l2_sq += w * ev * ev;
      h1_sq += w * ed * ed;
      vmax = std::max(vmax, std::abs(ev));
    }
    for (int s = 0; s <= 16; ++s) {
      const double x = x0 + h * s / 16.0;
      vmax = std::max(vmax, std::abs(u.evaluate(x, 0) - ref.value(x)));
    }
  }

  ErrorReport rep;
  rep.l2 = std::sqrt(l2_sq);
  rep.h1_semi = std::sqrt(h1_sq);
  rep.energy = std::sqrt(eps * h1_sq + gamma_tilde * l2_sq);
  rep.max = vmax;
  rep.eps = eps;
  rep.gamma_tilde = gamma_tilde;
  rep.quad_points = quad_points_per_cell;
  rep.reference_note = ref.provenance;
  return rep;
}

// ---------------------------------------------------------------------------
// Rate fitting: least-squares slope of ln(error) against ln(metric).

inline double fit_order(const std::vector<double>& metric,
                        const std::vector<double>& errors) {
  if (metric.size() != errors.size() || metric.size() < 2)
    throw Error("fit_order: need matching lists with at least two entries");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double n = static_cast<double>(metric.size());
  for (std::size_t i = 0; i < metric.size(); ++i) {
    const double x = std::log(metric[i]);
    const double y = std::log(errors[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// Stepwise rate between consecutive N at fixed eps:
// ln(e_N / e_2N) / ln(m(N) / m(2N)).
inline double stepwise_rate(double err_coarse, double err_fine,
                            double metric_coarse, double metric_fine) {
  return std::log(err_coarse / err_fine) /
         std::log(metric_coarse / metric_fine);
}

inline double metric_plain(int n) { return 1.0 / n; }
inline double metric_ln_adjusted(int n) {
  return std::log(static_cast<double>(n)) / n;
}

// ---------------------------------------------------------------------------
// Interpolation-error studies for the layer lemmas.

struct InterpRegionErrors {
  double max = 0.0;
  double l2 = 0.0;
  double h1_weighted = 0.0;  // eps_tilde^{1/2} |.|_1 over the region
};

struct InterpStudyResult {
  int n = 0;
  InterpRegionErrors fine;    // [0, tau] (S-type) or whole mesh (power)
  InterpRegionErrors coarse;  // [tau, 1] for S-type meshes
  double energy = 0.0;        // |||.|||_eps with gamma_tilde = 1 (power case)
  double weighted_x1 = 0.0;   // sup |x^1 (phi - phi^I)'|, fine region
  double weighted_x2 = 0.0;   // sup |x^2 (phi - phi^I)'|, fine region
  double n_metric = 0.0;      // (K+1)/N for power meshes, tau-free otherwise
};

namespace norms_detail {

struct FnPair {
  ScalarField value, derivative;
};

inline InterpRegionErrors region_errors(const DiscreteFunction& u,
                                        const FnPair& ref, double eps_tilde,
                                        std::size_t first_cell,
                                        std::size_t cell_count, int qn) {
  const FESpace& space = u.space();
  const CellQuadrature cq = build_cell_quadrature(space, qn);
  InterpRegionErrors out;
  double l2_sq = 0.0, h1_sq = 0.0;
  for (std::size_t cell = first_cell; cell < first_cell + cell_count; ++cell) {
    const double h = space.mesh().h(cell);
    const double x0 = space.mesh().points[cell];
    for (int q = 0; q < qn; ++q) {
      const double x = x0 + h * cq.rule.points[q];
      const double ev = u.evaluate(x, 0) - ref.value(x);
      const double ed = u.evaluate(x, 1) - ref.derivative(x);
      const double w = cq.rule.weights[q] * h;
      l2_sq += w * ev * ev;
      h1_sq += w * ed * ed;
      out.max = std::max(out.max, std::abs(ev));
    }
    for (int s = 0; s <= 8; ++s)
      out.max = std::max(out.max,
                         std::abs(u.evaluate(x0 + h * s / 8.0, 0) -
                                  ref.value(x0 + h * s / 8.0)));
  }
  out.l2 = std::sqrt(l2_sq);
  out.h1_weighted = std::sqrt(eps_tilde * h1_sq);
  return out;
}

inline double weighted_sup(const DiscreteFunction& u, const FnPair& ref,
                           int ell, std::size_t first_cell,
                           std::size_t cell_count) {
  const FESpace& space = u.space();
  double sup = 0.0;
  for (std::size_t cell = first_cell; cell < first_cell + cell_count; ++cell) {
    const double h = space.mesh().h(cell);
    const double x0 = space.mesh().points[cell];
    for (int s = 0; s <= 12; ++s) {
      const double x = x0 + h * (s + 0.25) / 13.0;
      const double ed = u.evaluate(x, 1) - ref.derivative(x);
      sup = std::max(sup, std::pow(x, ell) * std::abs(ed));
    }
  }
  return sup;
}

}  // namespace norms_detail

// Exponential-layer study on an S-type mesh (layer at the left of [0,1]):
// interpolates phi_E = exp(-beta x / eps_tilde) and reports per-region norms
// plus the weighted derivative quantities for ell = 1, 2.
inline InterpStudyResult interp_error_study_exp(double eps_tilde, double beta,
                                                const Mesh& mesh, int k,
                                                NodeRule rule =
                                                    NodeRule::GaussLobatto) {
  if (mesh.segments.size() < 2)
    throw Error("interp_error_study_exp: mesh lacks fine/coarse region tags");
  auto space = std::make_shared<FESpace>(mesh, k, rule);
  norms_detail::FnPair phi{
      [=](double x) { return std::exp(-beta * x / eps_tilde); },
      [=](double x) {
        return -beta / eps_tilde * std::exp(-beta * x / eps_tilde);
      }};
  DiscreteFunction u = interpolate(phi.value, space);

  InterpStudyResult out;
  out.n = static_cast<int>(mesh.cell_count());
  const MeshSegment* fine = nullptr;
  const MeshSegment* coarse = nullptr;
  for (const auto& seg : mesh.segments) {
    if (seg.kind == SegmentKind::Fine && !fine) fine = &seg;
    if (seg.kind != SegmentKind::Fine && !coarse) coarse = &seg;
  }
  if (!fine || !coarse)
    throw Error("interp_error_study_exp: mesh lacks region tags");
  const int qn = 2 * k + 2;
  out.fine = norms_detail::region_errors(u, phi, eps_tilde, fine->first_cell,
                                         fine->cell_count, qn);
  out.coarse = norms_detail::region_errors(u, phi, eps_tilde,
                                           coarse->first_cell,
                                           coarse->cell_count, qn);
  out.weighted_x1 =
      norms_detail::weighted_sup(u, phi, 1, fine->first_cell, fine->cell_count);
  out.weighted_x2 =
      norms_detail::weighted_sup(u, phi, 2, fine->first_cell, fine->cell_count);
  return out;
}

// Power-layer study on a Sun-Stynes mesh (layer at the left of [0,1]):
// interpolates a representative of the power-layer bound. For lambda > 0 the
// cusp profile (sqrt(eps)+x)^lambda is used; lambda = 0 would make that
// profile constant, so the repulsive-boundary profile
// sqrt(eps) (sqrt(eps)+x)^{-1} stands in (it satisfies the same derivative
// bounds with lambda = 0).
inline InterpStudyResult interp_error_study_power(double eps, double lambda,
                                                  const Mesh& mesh, int k,
                                                  NodeRule rule =
                                                      NodeRule::GaussLobatto) {
  auto space = std::make_shared<FESpace>(mesh, k, rule);
  const double se = std::sqrt(eps);
  norms_detail::FnPair phi;
  if (lambda > 0.0) {
    phi = {[=](double x) { return std::pow(se + x, lambda); },
           [=](double x) { return lambda * std::pow(se + x, lambda - 1.0); }};
  } else {
    phi = {[=](double x) { return se / (se + x); },
           [=](double x) { return -se / ((se + x) * (se + x)); }};
  }
  DiscreteFunction u = interpolate(phi.value, space);

  InterpStudyResult out;
  out.n = static_cast<int>(mesh.cell_count());
  const int qn = 2 * k + 2;
  out.fine = norms_detail::region_errors(u, phi, eps, 0, mesh.cell_count(), qn);
  // Energy with gamma_tilde = 1: sqrt(eps |.|_1^2 + |.|_0^2); the region
  // h1_weighted already carries the eps weight.
  out.energy = std::sqrt(out.fine.h1_weighted * out.fine.h1_weighted +
                         out.fine.l2 * out.fine.l2);
  if (mesh.params.count("K"))
    out.n_metric = (mesh.params.at("K") + 1.0) / mesh.cell_count();
  return out;
}

}  // namespace layerfem
