#pragma once

// Banded linear systems with LU factorization and partial pivoting
// (LAPACK-style band storage with kl extra fill rows).

#include <cmath>
#include <string>
#include <vector>

#include "layerfem/expr.hpp"

namespace layerfem {

struct SolveError : Error {
  using Error::Error;
};

class BandedSystem {
 public:
  BandedSystem(int n, int kl, int ku)
      : n_(n), kl_(kl), ku_(ku), rows_(2 * kl + ku + 1),
        a_(static_cast<std::size_t>(rows_) * n, 0.0), rhs_(n, 0.0) {}

  int size() const { return n_; }
  int lower_bandwidth() const { return kl_; }
  int upper_bandwidth() const { return ku_; }

  bool in_band(int i, int j) const {
    return i >= 0 && j >= 0 && i < n_ && j < n_ && i - j <= kl_ && j - i <= ku_;
  }

  double& at(int i, int j) {
    return a_[index(i, j)];
  }
  double at(int i, int j) const {
    if (!in_band(i, j)) return 0.0;
    return a_[index(i, j)];
  }
  void add(int i, int j, double v) { a_[index(i, j)] += v; }

  std::vector<double>& rhs() { return rhs_; }
  const std::vector<double>& rhs() const { return rhs_; }

  double inf_norm() const {
    double norm = 0.0;
    for (int i = 0; i < n_; ++i) {
      double row = 0.0;
      for (int j = std::max(0, i - kl_); j <= std::min(n_ - 1, i + ku_); ++j)
        row += std::abs(at(i, j));
      norm = std::max(norm, row);
    }
    return norm;
  }

  std::vector<double> multiply(const std::vector<double>& x) const {
    std::vector<double> y(n_, 0.0);
    for (int i = 0; i < n_; ++i)
      for (int j = std::max(0, i - kl_); j <= std::min(n_ - 1, i + ku_); ++j)
        y[i] += at(i, j) * x[j];
    return y;
  }

 private:
  int n_, kl_, ku_, rows_;
  std::vector<double> a_;
  std::vector<double> rhs_;

  std::size_t index(int i, int j) const {
    // Row kl+ku holds the diagonal; entry (i,j) sits at row kl+ku+i-j.
    return static_cast<std::size_t>(kl_ + ku_ + i - j) * n_ + j;
  }

  friend std::vector<double> solve_banded(const BandedSystem&);
};

// Direct LU with partial pivoting confined to the band, followed by two
// iterative-refinement passes with extended-precision residuals. Verifies
// the final residual against 1e-10 * (|A| |x| + |b|) in the infinity norm.
inline std::vector<double> solve_banded(const BandedSystem& sys) {
  const int n = sys.n_, kl = sys.kl_, ku = sys.ku_;
  std::vector<double> band = sys.a_;
  auto el = [&](int i, int j) -> double& {
    // stored at row kl+ku+i-j, valid for j-i <= kl+ku after fill-in
    return band[static_cast<std::size_t>(kl + ku + i - j) * n + j];
  };

  std::vector<int> piv(n);
  for (int c = 0; c < n; ++c) {
    const int last = std::min(n - 1, c + kl);
    int p = c;
    double pmax = std::abs(el(c, c));
    for (int i = c + 1; i <= last; ++i) {
      const double v = std::abs(el(i, c));
      if (v > pmax) {
        pmax = v;
        p = i;
      }
    }
    if (pmax == 0.0)
      throw SolveError("singular system: zero pivot at dof " +
                       std::to_string(c));
    piv[c] = p;
    const int width = std::min(n - 1, c + kl + ku) - c;
    if (p != c)
      for (int j = 0; j <= width; ++j) std::swap(el(c, c + j), el(p, c + j));
    const double diag = el(c, c);
    for (int i = c + 1; i <= last; ++i) {
      const double m = el(i, c) / diag;
      el(i, c) = m;
      for (int j = 1; j <= width; ++j) el(i, c + j) -= m * el(c, c + j);
    }
  }

  auto factored_solve = [&](std::vector<double> b) {
    for (int c = 0; c < n; ++c) {
      if (piv[c] != c) std::swap(b[c], b[piv[c]]);
      const int last = std::min(n - 1, c + kl);
      for (int i = c + 1; i <= last; ++i) b[i] -= el(i, c) * b[c];
    }
    for (int c = n - 1; c >= 0; --c) {
      const int width = std::min(n - 1, c + kl + ku) - c;
      double s = b[c];
      for (int j = 1; j <= width; ++j) s -= el(c, c + j) * b[c + j];
      b[c] = s / el(c, c);
    }
    return b;
  };

  std::vector<double> x = factored_solve(sys.rhs_);
  for (int pass = 0; pass < 2; ++pass) {
    std::vector<double> r(n);
    for (int i = 0; i < n; ++i) {
      long double s = sys.rhs_[i];
      for (int j = std::max(0, i - kl); j <= std::min(n - 1, i + ku); ++j)
        s -= static_cast<long double>(sys.at(i, j)) * x[j];
      r[i] = static_cast<double>(s);
    }
    const std::vector<double> dx = factored_solve(std::move(r));
    for (int i = 0; i < n; ++i) x[i] += dx[i];
  }

  // Residual check. |Ax - b| is bounded by |A|_inf |x|_inf + |b|_inf.
  const std::vector<double> ax = sys.multiply(x);
  double res = 0.0, xn = 0.0, bn = 0.0;
  for (int i = 0; i < n; ++i) {
    res = std::max(res, std::abs(ax[i] - sys.rhs_[i]));
    xn = std::max(xn, std::abs(x[i]));
    bn = std::max(bn, std::abs(sys.rhs_[i]));
  }
  if (res > 1e-10 * (sys.inf_norm() * xn + bn))
    throw SolveError("banded solve residual too large: " +
                     std::to_string(res));
  return x;
}

}  // namespace layerfem
