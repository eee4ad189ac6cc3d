#include "layerfem/banded.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "test_util.hpp"

using layerfem::BandedSystem;
using layerfem::solve_banded;
using layerfem::SolveError;

namespace {

TEST(Banded, Identity) {
  BandedSystem sys(5, 1, 1);
  for (int i = 0; i < 5; ++i) {
    sys.at(i, i) = 1.0;
    sys.rhs()[i] = 2.0 * i - 3.0;
  }
  const auto x = solve_banded(sys);
  for (int i = 0; i < 5; ++i) EXPECT_DOUBLE_EQ(x[i], 2.0 * i - 3.0);
}

TEST(Banded, SingleDof) {
  BandedSystem sys(1, 1, 1);
  sys.at(0, 0) = 4.0;
  sys.rhs()[0] = 0.5;
  EXPECT_DOUBLE_EQ(solve_banded(sys)[0], 0.125);
}

TEST(Banded, SingularPivotNamesDof) {
  BandedSystem sys(3, 1, 1);
  sys.at(0, 0) = 1.0;
  sys.at(2, 2) = 1.0;
  // column 1 entirely zero
  try {
    solve_banded(sys);
    FAIL() << "expected SolveError";
  } catch (const SolveError& e) {
    EXPECT_NE(std::string(e.what()).find("dof 1"), std::string::npos);
  }
}

TEST(Banded, MatchesDenseOracle) {
  testutil::Rng rng(2024);
  for (int trial = 0; trial < 250; ++trial) {
    const int n = rng.uniform_int(1, 50);
    const int kl = rng.uniform_int(0, std::min(4, n - 1));
    const int ku = rng.uniform_int(0, std::min(4, n - 1));
    BandedSystem sys(n, kl, ku);
    std::vector<std::vector<double>> dense(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i) {
      for (int j = std::max(0, i - kl); j <= std::min(n - 1, i + ku); ++j) {
        const double v = rng.uniform(-1.0, 1.0);
        sys.at(i, j) = v;
        dense[i][j] = v;
      }
      dense[i][i] += 3.0;  // keep well conditioned
      sys.at(i, i) += 3.0;
      sys.rhs()[i] = rng.uniform(-2.0, 2.0);
    }
    const auto xb = solve_banded(sys);
    const auto xd = testutil::dense_solve(dense, sys.rhs());
    for (int i = 0; i < n; ++i) EXPECT_NEAR(xb[i], xd[i], 1e-10);
  }
}

TEST(Banded, PivotingHandlesZeroDiagonal) {
  // [0 1; 1 0] x = [2, 3] -> x = [3, 2]; requires a row swap.
  BandedSystem sys(2, 1, 1);
  sys.at(0, 1) = 1.0;
  sys.at(1, 0) = 1.0;
  sys.rhs() = {2.0, 3.0};
  const auto x = solve_banded(sys);
  EXPECT_DOUBLE_EQ(x[0], 3.0);
  EXPECT_DOUBLE_EQ(x[1], 2.0);
}

TEST(Banded, ResidualContract) {
  testutil::Rng rng(5);
  const int n = 40;
  BandedSystem sys(n, 2, 2);
  for (int i = 0; i < n; ++i) {
    for (int j = std::max(0, i - 2); j <= std::min(n - 1, i + 2); ++j)
      sys.at(i, j) = rng.uniform(-1.0, 1.0);
    sys.at(i, i) += 4.0;
    sys.rhs()[i] = rng.uniform(-1.0, 1.0);
  }
  const auto x = solve_banded(sys);  // throws if the residual contract fails
  const auto ax = sys.multiply(x);
  double res = 0.0;
  for (int i = 0; i < n; ++i) res = std::max(res, std::abs(ax[i] - sys.rhs()[i]));
  EXPECT_LE(res, 1e-10 * (sys.inf_norm() * 10.0 + 10.0));
}

}  // namespace
