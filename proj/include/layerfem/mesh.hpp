#pragma once

// Layer-adapted mesh constructions: S-type meshes for exponential layers,
// the Sun-Stynes piecewise-equidistant mesh for power-type layers, the
// composite strategy for general turning-point problems, and mesh quality
// checks.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "layerfem/expr.hpp"

namespace layerfem {

struct MeshError : Error {
  using Error::Error;
};

enum class SegmentKind { Fine, Coarse, Power, Uniform };

inline const char* segment_kind_name(SegmentKind k) {
  switch (k) {
    case SegmentKind::Fine: return "fine";
    case SegmentKind::Coarse: return "coarse";
    case SegmentKind::Power: return "power";
    case SegmentKind::Uniform: return "uniform";
  }
  return "?";
}

struct MeshSegment {
  SegmentKind kind;
  std::size_t first_cell = 0;
  std::size_t cell_count = 0;
  std::string note;
};

struct Mesh {
  std::vector<double> points;  // strictly increasing, endpoints exact
  std::string generator;
  std::map<std::string, double> params;  // provenance metadata
  std::vector<MeshSegment> segments;

  std::size_t cell_count() const { return points.size() - 1; }
  double h(std::size_t cell) const { return points[cell + 1] - points[cell]; }
  double left() const { return points.front(); }
  double right() const { return points.back(); }

  void validate() const {
    if (points.size() < 3) throw MeshError("mesh needs at least 2 cells");
    for (std::size_t i = 1; i < points.size(); ++i)
      if (!(points[i] > points[i - 1]))
        throw MeshError("mesh points not strictly increasing at index " +
                        std::to_string(i));
  }
};

// ---------------------------------------------------------------------------
// Mesh generating functions phi: [0,1/2] -> [0, ln N], phi(0)=0,
// phi(1/2)=ln N, with psi = exp(-phi).

enum class MeshGenKind { Shishkin, BakhvalovS };

struct MeshGenFunction {
  MeshGenKind kind = MeshGenKind::Shishkin;

  static MeshGenFunction from_name(std::string_view name) {
    if (name == "shishkin") return {MeshGenKind::Shishkin};
    if (name == "bakhvalov-s") return {MeshGenKind::BakhvalovS};
    throw Error("unknown mesh generating function '" + std::string(name) +
                "'; allowed: shishkin, bakhvalov-s");
  }

  const char* name() const {
    return kind == MeshGenKind::Shishkin ? "shishkin" : "bakhvalov-s";
  }

  double phi(double t, int n) const {
    const double lnn = std::log(static_cast<double>(n));
    switch (kind) {
      case MeshGenKind::Shishkin:
        return 2.0 * t * lnn;
      case MeshGenKind::BakhvalovS:
        return -std::log(1.0 - 2.0 * (1.0 - 1.0 / n) * t);
    }
    return 0.0;
  }

  double max_phi_prime(int n) const {
    switch (kind) {
      case MeshGenKind::Shishkin:
        return 2.0 * std::log(static_cast<double>(n));
      case MeshGenKind::BakhvalovS:
        return 2.0 * (n - 1.0);
    }
    return 0.0;
  }

  double max_psi_prime(int n) const {
    switch (kind) {
      case MeshGenKind::Shishkin:
        return 2.0 * std::log(static_cast<double>(n));
      case MeshGenKind::BakhvalovS:
        return 2.0 * (1.0 - 1.0 / n);
    }
    return 0.0;
  }
};

enum class LayerSide { Left, Right };

// ---------------------------------------------------------------------------
// S-type mesh on [l, r]: fine region of width tau = rho*(eps_tilde/beta)*ln N
// next to the layer, equidistant elsewhere. N must be even; the fine and
// coarse parts get N/2 cells each.

inline Mesh s_type_mesh(double eps_tilde, double beta, double rho, int n,
                        const MeshGenFunction& gen, LayerSide side, double l,
                        double r) {
  if (n < 2 || n % 2 != 0) throw MeshError("s_type_mesh: N must be even, >= 2");
  if (!(eps_tilde > 0.0) || !(beta > 0.0) || !(rho > 0.0))
    throw MeshError("s_type_mesh: eps_tilde, beta, rho must be positive");
  if (!(l < r)) throw MeshError("s_type_mesh: need l < r");
  const double scale = rho * eps_tilde / beta;
  const double tau = scale * std::log(static_cast<double>(n));
  if (!(tau <= 0.5 * (r - l)))
    throw MeshError("s_type_mesh: transition point exceeds half the interval");

  // Offsets from the layer end; d[n/2] = tau, remaining part equidistant.
  std::vector<double> d(n + 1);
  for (int i = 0; i <= n / 2; ++i)
    d[i] = scale * gen.phi(static_cast<double>(i) / n, n);
  for (int i = n / 2 + 1; i < n; ++i)
    d[i] = (r - l) - ((r - l) - tau) * (2.0 * (n - i)) / n;
  d[n] = r - l;

  Mesh m;
  m.points.resize(n + 1);
  if (side == LayerSide::Left) {
    for (int i = 0; i <= n; ++i) m.points[i] = l + d[i];
    m.segments = {{SegmentKind::Fine, 0, static_cast<std::size_t>(n / 2), ""},
                  {SegmentKind::Coarse, static_cast<std::size_t>(n / 2),
                   static_cast<std::size_t>(n - n / 2), ""}};
  } else {
    for (int i = 0; i <= n; ++i) m.points[i] = r - d[n - i];
    m.segments = {{SegmentKind::Coarse, 0, static_cast<std::size_t>(n - n / 2),
                   ""},
                  {SegmentKind::Fine, static_cast<std::size_t>(n - n / 2),
                   static_cast<std::size_t>(n / 2), ""}};
  }
  m.points.front() = l;
  m.points.back() = r;

  m.generator = std::string("s_type:") + gen.name();
  m.params = {{"eps_tilde", eps_tilde},
              {"beta", beta},
              {"rho", rho},
              {"N", static_cast<double>(n)},
              {"tau", tau},
              {"max_phi_prime", gen.max_phi_prime(n)},
              {"max_psi_prime", gen.max_psi_prime(n)}};
  m.validate();
  return m;
}

// ---------------------------------------------------------------------------
// Sun-Stynes piecewise equidistant mesh.

struct SunStynesParams {
  double sigma = 0.0;
  int K = 0;  // number of decades; K+1 subintervals
};

inline SunStynesParams sun_stynes_params(double eps, double lambda, int k,
                                         int n) {
  if (!(eps > 0.0) || eps > 1.0)
    throw MeshError("sun_stynes: eps must lie in (0,1]");
  if (k < 1) throw MeshError("sun_stynes: order k must be >= 1");
  if (lambda < 0.0 || lambda >= k + 1)
    throw MeshError("sun_stynes: lambda must lie in [0, k+1)");
  SunStynesParams p;
  p.sigma = std::max(std::pow(eps, (1.0 - lambda / (k + 1)) / 2.0),
                     std::pow(static_cast<double>(n), -(2.0 * k + 1.0)));
  // K is the unique integer with 10^-K < sigma <= 10^(1-K); the floor formula
  // is used as an initial guess and corrected against the defining
  // inequalities to stay robust to roundoff in log10.
  int K = static_cast<int>(
      std::floor(1.0 - std::log(p.sigma) / std::log(10.0)));
  while (std::pow(10.0, -K) >= p.sigma) ++K;
  while (K > 1 && std::pow(10.0, -(K - 1)) < p.sigma) --K;
  p.K = K;
  return p;
}

// Unit-interval mesh points (ascending, on [0,1], layer at 0) realizing the
// generating function Phi_{N,lambda}. Exactly n cells; when (K+1) does not
// divide n the extra cells go to the widest (outermost) subintervals so that
// h_i <= (K+1)/n still holds.
inline std::vector<double> sun_stynes_unit_points(double eps, double lambda,
                                                  int k, int n,
                                                  SunStynesParams* out_params =
                                                      nullptr) {
  const SunStynesParams p = sun_stynes_params(eps, lambda, k, n);
  const int K = p.K;
  if (n < 2 * (K + 1))
    throw MeshError("sun_stynes: N = " + std::to_string(n) +
                    " too small for K+1 = " + std::to_string(K + 1) +
                    " subintervals (need N >= 2(K+1))");
  const int base = n / (K + 1);
  const int rem = n - base * (K + 1);

  std::vector<double> pts;
  pts.reserve(n + 1);
  pts.push_back(0.0);
  // Subinterval s = 0 is (0, 10^-K]; s = K is (10^-1, 1].
  for (int s = 0; s <= K; ++s) {
    const double lo = std::pow(10.0, static_cast<double>(s - K - 1));
    const double hi = (s == K) ? 1.0 : std::pow(10.0, static_cast<double>(s - K));
    const double a = (s == 0) ? 0.0 : lo;
    const int cells = base + (s >= K + 1 - rem ? 1 : 0);
    for (int j = 1; j <= cells; ++j)
      pts.push_back(a + (hi - a) * (static_cast<double>(j) / cells));
    pts.back() = hi;
  }
  if (out_params) *out_params = p;
  return pts;
}

inline Mesh sun_stynes_mesh(double eps, double lambda, int k, int n,
                            LayerSide side, double l, double r) {
  if (!(l < r)) throw MeshError("sun_stynes_mesh: need l < r");
  SunStynesParams p;
  const std::vector<double> unit = sun_stynes_unit_points(eps, lambda, k, n, &p);

  Mesh m;
  m.points.resize(unit.size());
  if (side == LayerSide::Left) {
    for (std::size_t i = 0; i < unit.size(); ++i)
      m.points[i] = l + (r - l) * unit[i];
  } else {
    for (std::size_t i = 0; i < unit.size(); ++i)
      m.points[i] = r - (r - l) * unit[unit.size() - 1 - i];
  }
  m.points.front() = l;
  m.points.back() = r;

  // One tagged segment per decade subinterval.
  const int K = p.K;
  const int base = n / (K + 1);
  const int rem = n - base * (K + 1);
  std::size_t cell = 0;
  std::vector<MeshSegment> segs;
  for (int s = 0; s <= K; ++s) {
    const int cells = base + (s >= K + 1 - rem ? 1 : 0);
    segs.push_back({SegmentKind::Power, cell, static_cast<std::size_t>(cells),
                    "decade " + std::to_string(K - s)});
    cell += cells;
  }
  if (side == LayerSide::Right) {
    std::reverse(segs.begin(), segs.end());
    std::size_t first = 0;
    for (auto& s : segs) {
      s.first_cell = first;
      first += s.cell_count;
    }
  }
  m.segments = std::move(segs);

  m.generator = "sun_stynes";
  m.params = {{"eps", eps},
              {"lambda", lambda},
              {"k", static_cast<double>(k)},
              {"N", static_cast<double>(n)},
              {"sigma", p.sigma},
              {"K", static_cast<double>(p.K)}};
  m.validate();
  return m;
}

inline Mesh uniform_mesh(double l, double r, int n, std::string note = "") {
  if (n < 2) throw MeshError("uniform_mesh: need N >= 2");
  Mesh m;
  m.points.resize(n + 1);
  for (int i = 0; i <= n; ++i)
    m.points[i] = l + (r - l) * (static_cast<double>(i) / n);
  m.points.front() = l;
  m.points.back() = r;
  m.generator = "uniform";
  m.params = {{"N", static_cast<double>(n)}};
  m.segments = {{SegmentKind::Uniform, 0, static_cast<std::size_t>(n),
                 std::move(note)}};
  m.validate();
  return m;
}

// ---------------------------------------------------------------------------
// Quality report: h_i <= C N^-1 and h_i^-1 |b|_inf,cell <= C N.

struct MeshQualityReport {
  double max_h_times_n = 0.0;         // max_i h_i * N
  double max_b_over_h_n = 0.0;        // max_i |b|_inf,i / (h_i * N)
  std::vector<std::size_t> violations;
};

inline MeshQualityReport mesh_quality_report(
    const Mesh& m, const std::function<double(double)>& b, int n,
    double h_threshold = 0.0, double b_threshold = 0.0) {
  MeshQualityReport rep;
  for (std::size_t i = 0; i < m.cell_count(); ++i) {
    const double h = m.h(i);
    double bmax = 0.0;
    for (int s = 0; s < 8; ++s) {
      const double x = m.points[i] + h * (s + 0.5) / 8.0;
      bmax = std::max(bmax, std::abs(b(x)));
    }
    bmax = std::max(bmax, std::max(std::abs(b(m.points[i])),
                                   std::abs(b(m.points[i + 1]))));
    const double ch = h * n;
    const double cb = bmax / (h * n);
    rep.max_h_times_n = std::max(rep.max_h_times_n, ch);
    rep.max_b_over_h_n = std::max(rep.max_b_over_h_n, cb);
    if ((h_threshold > 0.0 && ch > h_threshold) ||
        (b_threshold > 0.0 && cb > b_threshold))
      rep.violations.push_back(i);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Composite strategy for a classified layer map. The LayerMap type lives in
// problem.hpp; only the fields needed here are taken as a flat description to
// keep this header independent.

struct LayerRegionSpec {
  // Exponential boundary layers (subset of the two interval endpoints).
  struct ExpLayer {
    double location;    // underline-a or overline-a
    double beta;        // decay rate
    bool sqrt_width;    // true: eps_tilde = sqrt(eps)
    double delta_k;     // separation distance (4.13)
  };
  // Power-type points needing Sun-Stynes grading.
  struct PowerPoint {
    double location;
    double lambda;      // 0 for boundary power layers, mu*c/|b'| for M_k
    bool interior;      // mirrored on both sides when true
  };
  std::vector<ExpLayer> exp_layers;
  std::vector<PowerPoint> power_points;
};

namespace mesh_detail {

// Largest-remainder apportionment of n cells over weights, with a floor.
inline std::vector<int> apportion(int n, const std::vector<double>& weights,
                                  int minimum) {
  const double total = [&] {
    double t = 0.0;
    for (double w : weights) t += w;
    return t;
  }();
  std::vector<int> cells(weights.size());
  std::vector<std::pair<double, std::size_t>> frac;
  int assigned = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double share = n * weights[i] / total;
    cells[i] = static_cast<int>(std::floor(share));
    frac.push_back({share - cells[i], i});
    assigned += cells[i];
  }
  std::sort(frac.begin(), frac.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  for (int i = 0; assigned < n; ++i, ++assigned) cells[frac[i % frac.size()].second] += 1;
  for (std::size_t i = 0; i < cells.size(); ++i)
    if (cells[i] < minimum)
      throw MeshError("cell budget too small: region " + std::to_string(i) +
                      " received " + std::to_string(cells[i]) +
                      " cells (minimum " + std::to_string(minimum) + ")");
  return cells;
}

}  // namespace mesh_detail

// Composite mesh per the general strategy: S-type fine regions at exponential
// boundary layers, Sun-Stynes regions tiling the middle when power points
// exist, uniform cells otherwise. Falls back to a uniform mesh when a
// transition width violates 2*tau <= delta_k.
inline Mesh general_layer_mesh(const LayerRegionSpec& spec, double eps, int n,
                               int k, double rho, const MeshGenFunction& gen,
                               double l, double r) {
  if (spec.exp_layers.empty() && spec.power_points.empty())
    return uniform_mesh(l, r, n, "no layers");

  // Transition widths; Remark 4.6 fallback when they collide.
  struct ExpRegion {
    double location, tau, beta, eps_tilde;
  };
  std::vector<ExpRegion> exps;
  for (const auto& e : spec.exp_layers) {
    const double et = e.sqrt_width ? std::sqrt(eps) : eps;
    const double tau = rho * (et / e.beta) * std::log(static_cast<double>(n));
    if (2.0 * tau > e.delta_k)
      return uniform_mesh(l, r, n,
                          "fallback: 2*tau > delta at x=" +
                              std::to_string(e.location));
    exps.push_back({e.location, tau, e.beta, et});
  }

  // Region plan, left to right. Each region knows its producer.
  struct Region {
    double a, b;
    enum class Kind { ExpLeftLayer, ExpRightLayer, PowerLeft, PowerRight,
                      Plain } kind;
    double lambda = 0.0;
  };
  std::vector<Region> regions;

  double mid_l = l, mid_r = r;
  const ExpRegion* left_exp = nullptr;
  const ExpRegion* right_exp = nullptr;
  for (const auto& e : exps) {
    if (e.location == l) {
      left_exp = &e;
      mid_l = l + e.tau;
    } else {
      right_exp = &e;
      mid_r = r - e.tau;
    }
  }
  if (!(mid_l < mid_r))
    return uniform_mesh(l, r, n, "fallback: transition regions overlap");

  if (left_exp)
    regions.push_back({l, mid_l, Region::Kind::ExpLeftLayer, 0.0});

  std::vector<LayerRegionSpec::PowerPoint> pps = spec.power_points;
  std::sort(pps.begin(), pps.end(),
            [](const auto& a, const auto& b) { return a.location < b.location; });
  if (pps.empty()) {
    regions.push_back({mid_l, mid_r, Region::Kind::Plain});
  } else {
    // Split the middle at midpoints between consecutive power anchors; every
    // sub-segment is graded toward its anchor. A leading/trailing stretch
    // without its own anchor joins the nearest anchor's far side.
    std::vector<double> cuts;
    cuts.push_back(mid_l);
    for (std::size_t i = 0; i + 1 < pps.size(); ++i)
      cuts.push_back(0.5 * (pps[i].location + pps[i + 1].location));
    cuts.push_back(mid_r);
    for (std::size_t i = 0; i < pps.size(); ++i) {
      const auto& p = pps[i];
      const double a = cuts[i], b = cuts[i + 1];
      if (p.location <= a) {
        regions.push_back({a, b, Region::Kind::PowerLeft, p.lambda});
      } else if (p.location >= b) {
        regions.push_back({a, b, Region::Kind::PowerRight, p.lambda});
      } else {
        regions.push_back({a, p.location, Region::Kind::PowerRight, p.lambda});
        regions.push_back({p.location, b, Region::Kind::PowerLeft, p.lambda});
      }
    }
  }

  if (right_exp)
    regions.push_back({mid_r, r, Region::Kind::ExpRightLayer, 0.0});

  // Budget: an exponential region takes N/4 (N/2 when it is the only layer);
  // the rest is split equally among the remaining regions.
  const int n_exp = static_cast<int>(exps.size());
  int exp_cells = 0;
  if (n_exp > 0) {
    exp_cells = (n_exp == 1 && spec.power_points.empty()) ? n / 2 : n / 4;
    if (exp_cells < 1)
      throw MeshError("cell budget too small for the exponential layer regions");
  }

  const int rest_total = n - n_exp * exp_cells;
  std::vector<double> weights;
  for (const auto& reg : regions)
    if (reg.kind != Region::Kind::ExpLeftLayer &&
        reg.kind != Region::Kind::ExpRightLayer)
      weights.push_back(1.0);
  std::vector<int> rest_cells = mesh_detail::apportion(rest_total, weights, 8);

  // Emit points region by region.
  Mesh m;
  m.points.push_back(l);
  std::size_t cell_cursor = 0;
  std::size_t wi = 0;
  auto append = [&](const std::vector<double>& pts, SegmentKind kind,
                    const std::string& note) {
    for (std::size_t i = 1; i < pts.size(); ++i) m.points.push_back(pts[i]);
    const std::size_t cells = pts.size() - 1;
    m.segments.push_back({kind, cell_cursor, cells, note});
    cell_cursor += cells;
  };

  for (const auto& reg : regions) {
    char note[160];
    switch (reg.kind) {
      case Region::Kind::ExpLeftLayer: {
        // Fine part only: graded by phi over exp_cells cells.
        const ExpRegion& e = *left_exp;
        std::vector<double> pts(exp_cells + 1);
        const double scale = rho * e.eps_tilde / e.beta;
        for (int i = 0; i <= exp_cells; ++i)
          pts[i] = reg.a + scale * gen.phi(0.5 * i / exp_cells, n);
        pts.front() = reg.a;
        pts.back() = reg.b;
        std::snprintf(note, sizeof note, "exp layer at %.17g", e.location);
        append(pts, SegmentKind::Fine, note);
        break;
      }
      case Region::Kind::ExpRightLayer: {
        const ExpRegion& e = *right_exp;
        std::vector<double> pts(exp_cells + 1);
        const double scale = rho * e.eps_tilde / e.beta;
        for (int i = 0; i <= exp_cells; ++i)
          pts[i] = reg.b - scale * gen.phi(0.5 * (exp_cells - i) / exp_cells, n);
        pts.front() = reg.a;
        pts.back() = reg.b;
        std::snprintf(note, sizeof note, "exp layer at %.17g", e.location);
        append(pts, SegmentKind::Fine, note);
        break;
      }
      case Region::Kind::PowerLeft:
      case Region::Kind::PowerRight: {
        const int cells = rest_cells[wi++];
        const LayerSide side = reg.kind == Region::Kind::PowerLeft
                                   ? LayerSide::Left
                                   : LayerSide::Right;
        Mesh sub = sun_stynes_mesh(eps, reg.lambda, k, cells, side, reg.a,
                                   reg.b);
        std::snprintf(note, sizeof note, "power lambda=%.17g K=%g", reg.lambda,
                      sub.params.at("K"));
        append(sub.points, SegmentKind::Power, note);
        break;
      }
      case Region::Kind::Plain: {
        const int cells = rest_cells[wi++];
        std::vector<double> pts(cells + 1);
        for (int i = 0; i <= cells; ++i)
          pts[i] = reg.a + (reg.b - reg.a) * (static_cast<double>(i) / cells);
        pts.front() = reg.a;
        pts.back() = reg.b;
        append(pts, SegmentKind::Uniform, "");
        break;
      }
    }
  }
  m.points.back() = r;

  m.generator = std::string("general_layer:") + gen.name();
  m.params = {{"eps", eps},
              {"N", static_cast<double>(n)},
              {"k", static_cast<double>(k)},
              {"rho", rho},
              {"max_phi_prime", gen.max_phi_prime(n)},
              {"max_psi_prime", gen.max_psi_prime(n)}};
  m.validate();
  if (m.cell_count() != static_cast<std::size_t>(n))
    throw MeshError("general_layer_mesh: cell budget mismatch");
  return m;
}

// ---------------------------------------------------------------------------
// The concrete example meshes. All live on the problem's natural interval and
// evaluate the published formulas directly.

// Sun-Stynes(lambda=0) on [0,1-tau] plus an S-type fine region on [1-tau,1];
// eps_tilde = eps for an outflow layer, sqrt(eps) for a multiple turning
// point at x=1.
inline Mesh mesh_power_left_exp_right(double eps, double eps_tilde,
                                      double beta, double rho, int k, int n,
                                      const MeshGenFunction& gen) {
  if (n % 2 != 0 || n < 4)
    throw MeshError("mesh requires even N >= 4");
  const double tau = rho * (eps_tilde / beta) * std::log(static_cast<double>(n));
  if (!(tau <= 0.5))
    throw MeshError("transition point tau exceeds 1/2; use the uniform fallback");
  SunStynesParams ssp;
  const std::vector<double> unit =
      sun_stynes_unit_points(eps, 0.0, k, n / 2, &ssp);

  Mesh m;
  m.points.resize(n + 1);
  for (int i = 0; i <= n / 2; ++i) m.points[i] = (1.0 - tau) * unit[i];
  const double scale = rho * eps_tilde / beta;
  for (int i = n / 2; i <= n; ++i)
    m.points[i] = 1.0 - scale * gen.phi(static_cast<double>(n - i) / n, n);
  m.points.front() = 0.0;
  m.points.back() = 1.0;
  m.segments = {{SegmentKind::Power, 0, static_cast<std::size_t>(n / 2),
                 "sun-stynes lambda=0 K=" + std::to_string(ssp.K)},
                {SegmentKind::Fine, static_cast<std::size_t>(n / 2),
                 static_cast<std::size_t>(n / 2), "exp layer at 1"}};
  m.generator = std::string("power_left_exp_right:") + gen.name();
  m.params = {{"eps", eps},          {"eps_tilde", eps_tilde},
              {"beta", beta},        {"rho", rho},
              {"k", static_cast<double>(k)}, {"N", static_cast<double>(n)},
              {"tau", tau},          {"sigma", ssp.sigma},
              {"K", static_cast<double>(ssp.K)},
              {"max_phi_prime", gen.max_phi_prime(n)},
              {"max_psi_prime", gen.max_psi_prime(n)}};
  m.validate();
  return m;
}

// Mesh on [-1,1] for an interior attractive point at 0 and a repulsive
// boundary point at -1: three Sun-Stynes pieces.
inline Mesh mesh_interior_power(double eps, double lambda1, int k, int n) {
  if (n % 4 != 0 || n < 8)
    throw MeshError("interior power mesh requires N divisible by 4, >= 8");
  SunStynesParams p_bnd, p_int;
  const std::vector<double> left =
      sun_stynes_unit_points(eps, 0.0, k, n / 4, &p_bnd);
  const std::vector<double> mid =
      sun_stynes_unit_points(eps, lambda1, k, n / 4, &p_int);
  const std::vector<double> right =
      sun_stynes_unit_points(eps, lambda1, k, n / 2, nullptr);

  Mesh m;
  m.points.reserve(n + 1);
  for (int i = 0; i <= n / 4; ++i) m.points.push_back(-1.0 + 0.5 * left[i]);
  for (int i = 1; i <= n / 4; ++i)
    m.points.push_back(-0.5 * mid[n / 4 - i]);
  for (int i = 1; i <= n / 2; ++i) m.points.push_back(right[i]);
  m.points.front() = -1.0;
  m.points[n / 2] = 0.0;
  m.points.back() = 1.0;
  m.segments = {{SegmentKind::Power, 0, static_cast<std::size_t>(n / 4),
                 "boundary power at -1, K=" + std::to_string(p_bnd.K)},
                {SegmentKind::Power, static_cast<std::size_t>(n / 4),
                 static_cast<std::size_t>(n / 4),
                 "interior left, K=" + std::to_string(p_int.K)},
                {SegmentKind::Power, static_cast<std::size_t>(n / 2),
                 static_cast<std::size_t>(n / 2),
                 "interior right, K=" + std::to_string(p_int.K)}};
  m.generator = "interior_power";
  m.params = {{"eps", eps},
              {"lambda1", lambda1},
              {"k", static_cast<double>(k)},
              {"N", static_cast<double>(n)},
              {"K0", static_cast<double>(p_bnd.K)}};
  m.validate();
  return m;
}

// Mesh on [0,1] for two exponential layers of different width: sqrt(eps)
// layer at 0, eps layer at 1, uniform in between.
inline Mesh mesh_two_exp_layers(double eps, double beta0, double beta1,
                                double rho, int n,
                                const MeshGenFunction& gen) {
  if (n % 4 != 0 || n < 8)
    throw MeshError("two-layer mesh requires N divisible by 4, >= 8");
  const double lnn = std::log(static_cast<double>(n));
  const double tau0 = rho * (std::sqrt(eps) / beta0) * lnn;
  const double tau1 = rho * (eps / beta1) * lnn;
  if (!(std::max(tau0, tau1) <= 0.25))
    throw MeshError("transition points exceed 1/4; use the uniform fallback");

  Mesh m;
  m.points.resize(n + 1);
  const double s0 = rho * std::sqrt(eps) / beta0;
  const double s1 = rho * eps / beta1;
  for (int i = 0; i <= n / 4; ++i)
    m.points[i] = s0 * gen.phi(2.0 * i / n, n);
  for (int i = n / 4; i <= 3 * n / 4; ++i) {
    const double t = (4.0 * i - n) / (2.0 * n);
    m.points[i] = tau0 + (1.0 - tau0 - tau1) * t;
  }
  for (int i = 3 * n / 4; i <= n; ++i)
    m.points[i] = 1.0 - s1 * gen.phi(2.0 * (n - i) / static_cast<double>(n), n);
  m.points.front() = 0.0;
  m.points.back() = 1.0;
  m.segments = {{SegmentKind::Fine, 0, static_cast<std::size_t>(n / 4),
                 "sqrt(eps) layer at 0"},
                {SegmentKind::Uniform, static_cast<std::size_t>(n / 4),
                 static_cast<std::size_t>(n / 2), ""},
                {SegmentKind::Fine, static_cast<std::size_t>(3 * n / 4),
                 static_cast<std::size_t>(n / 4), "eps layer at 1"}};
  m.generator = std::string("two_exp_layers:") + gen.name();
  m.params = {{"eps", eps},   {"beta0", beta0}, {"beta1", beta1},
              {"rho", rho},   {"N", static_cast<double>(n)},
              {"tau0", tau0}, {"tau1", tau1},
              {"max_phi_prime", gen.max_phi_prime(n)},
              {"max_psi_prime", gen.max_psi_prime(n)}};
  m.validate();
  return m;
}

}  // namespace layerfem
