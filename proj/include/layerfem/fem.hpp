#pragma once

// Order-k Lagrange elements on an arbitrary mesh: assembly of the weak form,
// banded direct solve, damped Newton for the semilinear case, interpolation
// and point evaluation.

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "layerfem/banded.hpp"
#include "layerfem/mesh.hpp"
#include "layerfem/quadrature.hpp"

namespace layerfem {

using ScalarField = std::function<double(double)>;          // f(x)
using ScalarField2 = std::function<double(double, double)>; // f(x,u)

enum class NodeRule { Uniform, GaussLobatto };

inline NodeRule node_rule_from_name(std::string_view name) {
  if (name == "uniform") return NodeRule::Uniform;
  if (name == "gauss-lobatto") return NodeRule::GaussLobatto;
  throw Error("unknown node rule '" + std::string(name) +
              "'; allowed: uniform, gauss-lobatto");
}

// ---------------------------------------------------------------------------

class FESpace {
 public:
  FESpace(Mesh mesh, int order, NodeRule rule = NodeRule::GaussLobatto)
      : mesh_(std::move(mesh)), order_(order), rule_(rule) {
    if (order_ < 1) throw Error("FESpace: order must be >= 1");
    ref_nodes_ = rule_ == NodeRule::GaussLobatto
                     ? gauss_lobatto_points(order_ + 1)
                     : uniform_points(order_ + 1);
  }

  const Mesh& mesh() const { return mesh_; }
  int order() const { return order_; }
  NodeRule rule() const { return rule_; }
  const std::vector<double>& reference_nodes() const { return ref_nodes_; }

  std::size_t cells() const { return mesh_.cell_count(); }
  // Interior dofs only; the two boundary nodes are constrained to zero.
  std::size_t dof_count() const { return cells() * order_ - 1; }
  std::size_t node_count() const { return cells() * order_ + 1; }

  // Global node index of local node j in cell c.
  std::size_t global_node(std::size_t cell, int j) const {
    return cell * order_ + j;
  }
  double node_position(std::size_t global) const {
    const std::size_t cell = std::min(global / order_, cells() - 1);
    const int j = static_cast<int>(global - cell * order_);
    return mesh_.points[cell] + mesh_.h(cell) * ref_nodes_[j];
  }

  // Lagrange basis value and derivative at reference coordinate t in [0,1].
  void basis_at(double t, std::vector<double>& val,
                std::vector<double>& der) const {
    const int m = order_ + 1;
    val.assign(m, 0.0);
    der.assign(m, 0.0);
    for (int j = 0; j < m; ++j) {
      double v = 1.0;
      for (int q = 0; q < m; ++q)
        if (q != j) v *= (t - ref_nodes_[q]) / (ref_nodes_[j] - ref_nodes_[q]);
      val[j] = v;
      double d = 0.0;
      for (int q = 0; q < m; ++q) {
        if (q == j) continue;
        double term = 1.0 / (ref_nodes_[j] - ref_nodes_[q]);
        for (int s = 0; s < m; ++s)
          if (s != j && s != q)
            term *= (t - ref_nodes_[s]) / (ref_nodes_[j] - ref_nodes_[s]);
        d += term;
      }
      der[j] = d;
    }
  }

  std::size_t locate_cell(double x) const {
    const auto& pts = mesh_.points;
    if (x < pts.front() || x > pts.back())
      throw Error("evaluate: x = " + std::to_string(x) +
                  " outside the interval");
    // Left-cell convention at shared points: cell i covers (x_i, x_{i+1}].
    auto it = std::lower_bound(pts.begin(), pts.end(), x);
    std::size_t idx = static_cast<std::size_t>(it - pts.begin());
    if (idx == 0) return 0;
    return idx - 1;
  }

 private:
  Mesh mesh_;
  int order_;
  NodeRule rule_;
  std::vector<double> ref_nodes_;
};

using FESpacePtr = std::shared_ptr<const FESpace>;

// ---------------------------------------------------------------------------

class DiscreteFunction {
 public:
  DiscreteFunction() = default;
  DiscreteFunction(FESpacePtr space, std::vector<double> coeffs,
                   double left_bc = 0.0, double right_bc = 0.0)
      : space_(std::move(space)), coeffs_(std::move(coeffs)),
        left_bc_(left_bc), right_bc_(right_bc) {
    if (coeffs_.size() != space_->dof_count())
      throw Error("DiscreteFunction: coefficient count mismatch");
  }

  const FESpace& space() const { return *space_; }
  FESpacePtr space_ptr() const { return space_; }
  const std::vector<double>& coefficients() const { return coeffs_; }
  double left_bc() const { return left_bc_; }
  double right_bc() const { return right_bc_; }

  // Value at global node index (0 .. N*k), including boundary nodes.
  double node_value(std::size_t global) const {
    if (global == 0) return left_bc_;
    if (global == space_->node_count() - 1) return right_bc_;
    return coeffs_[global - 1];
  }

  double evaluate(double x, int derivative_order = 0) const {
    const std::size_t cell = space_->locate_cell(x);
    const double h = space_->mesh().h(cell);
    const double t = (x - space_->mesh().points[cell]) / h;
    std::vector<double> val, der;
    space_->basis_at(t, val, der);
    double r = 0.0;
    const int k = space_->order();
    for (int j = 0; j <= k; ++j) {
      const double c = node_value(space_->global_node(cell, j));
      r += c * (derivative_order == 0 ? val[j] : der[j] / h);
    }
    return r;
  }

  double operator()(double x) const { return evaluate(x, 0); }

 private:
  FESpacePtr space_;
  std::vector<double> coeffs_;
  double left_bc_ = 0.0, right_bc_ = 0.0;
};

// Lagrange interpolant of g; boundary values stored so piecewise-P_k
// functions are reproduced exactly.
inline DiscreteFunction interpolate(const ScalarField& g,
                                    const FESpacePtr& space) {
  std::vector<double> coeffs(space->dof_count());
  for (std::size_t d = 0; d < coeffs.size(); ++d)
    coeffs[d] = g(space->node_position(d + 1));
  const double lb = g(space->mesh().left());
  const double rb = g(space->mesh().right());
  return DiscreteFunction(space, std::move(coeffs), lb, rb);
}

// ---------------------------------------------------------------------------
// Assembly. Cell integrals use Gauss-Legendre with q points (default k+2,
// exact for the diffusion block).

struct CellQuadrature {
  QuadratureRule rule;
  // Basis values/derivatives at each reference quadrature point.
  std::vector<std::vector<double>> val, der;
};

inline CellQuadrature build_cell_quadrature(const FESpace& space, int qpoints) {
  CellQuadrature cq;
  cq.rule = gauss_legendre(qpoints);
  cq.val.resize(qpoints);
  cq.der.resize(qpoints);
  for (int q = 0; q < qpoints; ++q)
    space.basis_at(cq.rule.points[q], cq.val[q], cq.der[q]);
  return cq;
}

inline BandedSystem assemble_linear(const FESpace& space, double eps,
                                    const ScalarField& b, const ScalarField& c,
                                    const ScalarField& f, int qpoints = 0) {
  const int k = space.order();
  if (qpoints <= 0) qpoints = k + 2;
  const CellQuadrature cq = build_cell_quadrature(space, qpoints);
  const std::size_t n = space.dof_count();
  BandedSystem sys(static_cast<int>(n), k, k);

  const std::size_t last_node = space.node_count() - 1;
  for (std::size_t cell = 0; cell < space.cells(); ++cell) {
    const double h = space.mesh().h(cell);
    const double x0 = space.mesh().points[cell];
    for (int q = 0; q < qpoints; ++q) {
      const double x = x0 + h * cq.rule.points[q];
      const double w = cq.rule.weights[q] * h;
      const double bv = b(x), cv = c(x), fv = f(x);
      for (int i = 0; i <= k; ++i) {
        const std::size_t gi = space.global_node(cell, i);
        if (gi == 0 || gi == last_node) continue;
        const double phi_i = cq.val[q][i];
        const double dphi_i = cq.der[q][i] / h;
        sys.rhs()[gi - 1] += w * fv * phi_i;
        for (int j = 0; j <= k; ++j) {
          const std::size_t gj = space.global_node(cell, j);
          if (gj == 0 || gj == last_node) continue;
          const double phi_j = cq.val[q][j];
          const double dphi_j = cq.der[q][j] / h;
          sys.add(static_cast<int>(gi - 1), static_cast<int>(gj - 1),
                  w * (eps * dphi_i * dphi_j + bv * dphi_j * phi_i +
                       cv * phi_j * phi_i));
        }
      }
    }
  }
  return sys;
}

inline DiscreteFunction solve_linear_system(const FESpacePtr& space,
                                            BandedSystem& sys) {
  std::vector<double> coeffs = solve_banded(sys);
  return DiscreteFunction(space, std::move(coeffs));
}

// ---------------------------------------------------------------------------
// Damped Newton for the semilinear discrete problem
//   B_eps(u,v) = (eps u',v') + (b u',v) + (f(.,u),v) = 0 for all v in V^N.

struct NewtonOptions {
  double tol = 1e-10;
  int max_iter = 25;
  int max_halvings = 30;
  int qpoints = 0;  // 0: k+2
};

struct NewtonTrace {
  std::vector<double> residual_norms;  // |R| at start and after each step
  std::vector<double> step_factors;    // accepted damping factor per step
  bool converged = false;
  int iterations = 0;
  std::string message;
};

struct SemilinearForm {
  double eps;
  ScalarField b;
  ScalarField2 f;   // f(x,u)
  ScalarField2 fu;  // df/du(x,u)
};

namespace fem_detail {

inline std::vector<double> residual(const FESpace& space,
                                    const SemilinearForm& form,
                                    const CellQuadrature& cq,
                                    const std::vector<double>& u) {
  const int k = space.order();
  const std::size_t last_node = space.node_count() - 1;
  std::vector<double> r(space.dof_count(), 0.0);
  auto node_val = [&](std::size_t g) {
    return (g == 0 || g == last_node) ? 0.0 : u[g - 1];
  };
  const int qn = static_cast<int>(cq.rule.points.size());
  for (std::size_t cell = 0; cell < space.cells(); ++cell) {
    const double h = space.mesh().h(cell);
    const double x0 = space.mesh().points[cell];
    for (int q = 0; q < qn; ++q) {
      const double x = x0 + h * cq.rule.points[q];
      const double w = cq.rule.weights[q] * h;
      double uval = 0.0, uder = 0.0;
      for (int j = 0; j <= k; ++j) {
        const double c = node_val(space.global_node(cell, j));
        uval += c * cq.val[q][j];
        uder += c * cq.der[q][j] / h;
      }
      const double bv = form.b(x);
      const double fv = form.f(x, uval);
      for (int i = 0; i <= k; ++i) {
        const std::size_t gi = space.global_node(cell, i);
        if (gi == 0 || gi == last_node) continue;
        r[gi - 1] += w * (form.eps * uder * cq.der[q][i] / h +
                          bv * uder * cq.val[q][i] + fv * cq.val[q][i]);
      }
    }
  }
  return r;
}

inline BandedSystem jacobian(const FESpace& space, const SemilinearForm& form,
                             const CellQuadrature& cq,
                             const std::vector<double>& u,
                             const std::vector<double>& rhs) {
  const int k = space.order();
  const std::size_t last_node = space.node_count() - 1;
  BandedSystem sys(static_cast<int>(space.dof_count()), k, k);
  auto node_val = [&](std::size_t g) {
    return (g == 0 || g == last_node) ? 0.0 : u[g - 1];
  };
  const int qn = static_cast<int>(cq.rule.points.size());
  for (std::size_t cell = 0; cell < space.cells(); ++cell) {
    const double h = space.mesh().h(cell);
    const double x0 = space.mesh().points[cell];
    for (int q = 0; q < qn; ++q) {
      const double x = x0 + h * cq.rule.points[q];
      const double w = cq.rule.weights[q] * h;
      double uval = 0.0;
      for (int j = 0; j <= k; ++j)
        uval += node_val(space.global_node(cell, j)) * cq.val[q][j];
      const double bv = form.b(x);
      const double dfv = form.fu(x, uval);
      for (int i = 0; i <= k; ++i) {
        const std::size_t gi = space.global_node(cell, i);
        if (gi == 0 || gi == last_node) continue;
        for (int j = 0; j <= k; ++j) {
          const std::size_t gj = space.global_node(cell, j);
          if (gj == 0 || gj == last_node) continue;
          sys.add(static_cast<int>(gi - 1), static_cast<int>(gj - 1),
                  w * (form.eps * (cq.der[q][i] / h) * (cq.der[q][j] / h) +
                       bv * (cq.der[q][j] / h) * cq.val[q][i] +
                       dfv * cq.val[q][j] * cq.val[q][i]));
        }
      }
    }
  }
  sys.rhs() = rhs;
  return sys;
}

inline double norm2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace fem_detail

struct NewtonResult {
  DiscreteFunction solution;
  NewtonTrace trace;
};

// Newton iteration with Armijo backtracking on the residual Euclidean norm.
// The monotonicity of the continuous problem guarantees a unique discrete
// solution, which is reported when the iteration stagnates.
inline NewtonResult solve_semilinear(const FESpacePtr& space,
                                     const SemilinearForm& form,
                                     const DiscreteFunction& initial,
                                     const NewtonOptions& opts = {}) {
  const int qpoints = opts.qpoints > 0 ? opts.qpoints : space->order() + 2;
  const CellQuadrature cq = build_cell_quadrature(*space, qpoints);

  std::vector<double> u = initial.coefficients();
  NewtonTrace trace;

  std::vector<double> r = fem_detail::residual(*space, form, cq, u);
  double rnorm = fem_detail::norm2(r);
  const double r0 = rnorm;
  trace.residual_norms.push_back(rnorm);
  const double target = opts.tol * (1.0 + r0);

  for (int it = 0; it < opts.max_iter; ++it) {
    if (rnorm <= target) {
      trace.converged = true;
      break;
    }
    std::vector<double> neg_r(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) neg_r[i] = -r[i];
    BandedSystem jac = fem_detail::jacobian(*space, form, cq, u, neg_r);
    std::vector<double> step = solve_banded(jac);

    double alpha = 1.0;
    bool accepted = false;
    std::vector<double> u_try(u.size()), r_try;
    for (int halving = 0; halving <= opts.max_halvings; ++halving) {
      for (std::size_t i = 0; i < u.size(); ++i)
        u_try[i] = u[i] + alpha * step[i];
      r_try = fem_detail::residual(*space, form, cq, u_try);
      const double rn = fem_detail::norm2(r_try);
      if (rn <= (1.0 - 1e-4 * alpha) * rnorm) {
        u.swap(u_try);
        r.swap(r_try);
        rnorm = rn;
        trace.residual_norms.push_back(rnorm);
        trace.step_factors.push_back(alpha);
        trace.iterations = it + 1;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      trace.message =
          "line search failed; the discrete problem has a unique solution "
          "(monotone operator), so the Jacobian or scaling is suspect";
      return {DiscreteFunction(space, std::move(u)), std::move(trace)};
    }
  }
  if (!trace.converged && rnorm <= target) trace.converged = true;
  if (!trace.converged && trace.message.empty())
    trace.message = "maximum iterations reached";
  return {DiscreteFunction(space, std::move(u)), std::move(trace)};
}

// Convenience linear solve path: assembles and solves in one go.
inline DiscreteFunction solve_linear(const FESpacePtr& space, double eps,
                                     const ScalarField& b, const ScalarField& c,
                                     const ScalarField& f, int qpoints = 0) {
  BandedSystem sys = assemble_linear(*space, eps, b, c, f, qpoints);
  return solve_linear_system(space, sys);
}

}  // namespace layerfem
