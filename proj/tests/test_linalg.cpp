#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "sgrecon/ensembles.hpp"
#include "sgrecon/linalg.hpp"
#include "sgrecon/rng.hpp"
#include "sgrecon/stats.hpp"

using namespace sgrecon;

namespace {

Matrix random_gaussian(std::size_t k, std::size_t n, std::uint64_t seed) {
  RngState rng{seed};
  return sample_matrix(Ensemble::make(EnsembleKind::Gaussian), k, n, rng);
}

Vector random_vector(std::size_t n, RngState& rng) {
  Vector v(n);
  rng.fill_gaussian(v);
  return v;
}

}  // namespace

TEST(Rng, SameSeedAndCounterGiveIdenticalDraws) {
  RngState a{42, 7}, b{42, 7};
  for (int i = 0; i < 100; ++i) ASSERT_EQ(a.next_u64(), b.next_u64());
  EXPECT_EQ(a, b);
}

TEST(Rng, KnownFirstDrawsArePinned) {
  // Pins the generator so a silent change of the stream definition is caught.
  RngState a{0};
  const std::uint64_t key = splitmix64_mix(0x6A09E667F3BCC908ULL);
  EXPECT_EQ(a.next_u64(), splitmix64_mix(key + 0x9E3779B97F4A7C15ULL));
  EXPECT_EQ(a.next_u64(), splitmix64_mix(key + 2 * 0x9E3779B97F4A7C15ULL));
}

TEST(Rng, SubstreamsDifferAndDoNotAdvanceParent) {
  const RngState parent{5, 3};
  RngState s0 = parent.substream(0), s1 = parent.substream(1);
  EXPECT_NE(s0.next_u64(), s1.next_u64());
  EXPECT_EQ(parent.counter, 3u);
}

TEST(Rng, UniformRanges) {
  RngState r{9};
  for (int i = 0; i < 10000; ++i) {
    const double u = r.next_uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    const double v = r.next_open_uniform();
    ASSERT_GT(v, 0.0);
    ASSERT_LE(v, 1.0);
    ASSERT_LT(r.next_below(7), 7u);
  }
}

TEST(Stats, FitLineExactOnNoiselessData) {
  const std::vector<double> x = {0, 1, 2, 3}, y = {1, 3, 5, 7};
  const LineFit f = fit_line(x, y);
  EXPECT_NEAR(f.slope, 2.0, 1e-14);
  EXPECT_NEAR(f.intercept, 1.0, 1e-14);
  EXPECT_NEAR(f.slope_std_err, 0.0, 1e-14);
}

TEST(Stats, QuantileAndCombination) {
  EXPECT_DOUBLE_EQ(median({3, 1, 2}), 2.0);
  EXPECT_DOUBLE_EQ(quantile({0, 10}, 0.25), 2.5);
  EXPECT_DOUBLE_EQ(binomial(24, 2), 276.0);
  std::vector<std::size_t> c = {0, 1};
  std::size_t count = 1;
  while (next_combination(c, 5)) ++count;
  EXPECT_EQ(count, 10u);
}

TEST(Linalg, ApplyIdentityAndZero) {
  const Matrix id = Matrix::identity(2);
  const Vector x = {3, -1};
  EXPECT_EQ(multiply(id, x), x);
  const Matrix g = random_gaussian(3, 5, 1);
  EXPECT_EQ(multiply(g, Vector(5, 0.0)), Vector(3, 0.0));
}

TEST(Linalg, ApplyToBasisVectorGivesColumn) {
  const Matrix g = random_gaussian(3, 5, 2);
  Vector e(5, 0.0);
  e[2] = 1.0;
  EXPECT_EQ(multiply(g, e), g.column(2));
}

TEST(Linalg, ApplyIsLinear) {
  const Matrix g = random_gaussian(6, 9, 3);
  RngState rng{4};
  for (int t = 0; t < 20; ++t) {
    const Vector x = random_vector(9, rng), y = random_vector(9, rng);
    const double a = rng.next_gaussian(), b = rng.next_gaussian();
    Vector comb(9);
    for (std::size_t i = 0; i < 9; ++i) comb[i] = a * x[i] + b * y[i];
    const Vector lhs = multiply(g, comb), gx = multiply(g, x), gy = multiply(g, y);
    for (std::size_t i = 0; i < 6; ++i) {
      const double rhs = a * gx[i] + b * gy[i];
      ASSERT_NEAR(lhs[i], rhs, 1e-10 * (1.0 + std::abs(rhs)));
    }
  }
}

TEST(Linalg, ApplyRejectsDimensionMismatch) {
  EXPECT_THROW(multiply(Matrix::identity(2), Vector(3, 0.0)), std::invalid_argument);
  EXPECT_THROW(multiply_transpose(Matrix::identity(2), Vector(3, 0.0)), std::invalid_argument);
}

TEST(Linalg, DotUsesPairwiseSummation) {
  // 1e16 + 1 - 1e16 style cancellation is not the point; check exactness on representable sums.
  Vector a(1000, 0.1), b(1000, 1.0);
  EXPECT_NEAR(dot(a, b), 100.0, 1e-12);
}

TEST(Linalg, GramEigsSingleNormalizedColumn) {
  const std::size_t k = 4;
  Matrix g(k, 3, 0.0);
  for (std::size_t r = 0; r < 3; ++r) g(r, r) = std::sqrt(static_cast<double>(k));
  const EigenRange e = gram_extreme_eigs(g, std::vector<std::size_t>{0});
  EXPECT_NEAR(e.lambda_min, 1.0, 1e-14);
  EXPECT_NEAR(e.lambda_max, 1.0, 1e-14);
}

TEST(Linalg, GramEigsDuplicateColumnsAreSingular) {
  Matrix g = random_gaussian(8, 4, 5);
  for (std::size_t r = 0; r < 8; ++r) g(r, 3) = g(r, 1);
  const EigenRange e = gram_extreme_eigs(g, std::vector<std::size_t>{1, 3});
  EXPECT_NEAR(e.lambda_min, 0.0, 1e-10);
  EXPECT_GE(e.lambda_min, -1e-10);
}

TEST(Linalg, GramEigsMatchClosedForm2x2) {
  const Matrix g = random_gaussian(32, 64, 7);
  const std::vector<std::size_t> s = {0, 1};
  const Vector c0 = g.column(0), c1 = g.column(1);
  double a = 0, b = 0, c = 0;
  for (std::size_t r = 0; r < 32; ++r) {
    a += c0[r] * c0[r];
    b += c0[r] * c1[r];
    c += c1[r] * c1[r];
  }
  const auto [lo, hi] = oracle::eig2x2(a / 32, b / 32, c / 32);
  const EigenRange e = gram_extreme_eigs(g, s);
  EXPECT_NEAR(e.lambda_min, lo, 1e-10);
  EXPECT_NEAR(e.lambda_max, hi, 1e-10);
}

TEST(Linalg, GramEigsRejectEmptySupport) {
  EXPECT_THROW(gram_extreme_eigs(Matrix::identity(2), std::vector<std::size_t>{}), std::invalid_argument);
}

TEST(Linalg, RayleighQuotientsLieInGramRange) {
  const Matrix g = random_gaussian(16, 12, 8);
  RngState rng{9};
  for (const std::vector<std::size_t>& s :
       {std::vector<std::size_t>{0, 5}, std::vector<std::size_t>{1, 2, 3}, std::vector<std::size_t>{4, 7, 9, 11}}) {
    const EigenRange e = gram_extreme_eigs(g, s);
    for (int t = 0; t < 100; ++t) {
      Vector x(12, 0.0);
      double nn = 0.0;
      for (std::size_t i : s) {
        x[i] = rng.next_gaussian();
        nn += x[i] * x[i];
      }
      for (double& v : x) v /= std::sqrt(nn);
      const Vector gx = multiply(g, x);
      const double q = dot(gx, gx) / 16.0;
      ASSERT_GE(q, e.lambda_min - 1e-9);
      ASSERT_LE(q, e.lambda_max + 1e-9);
    }
  }
}

TEST(Linalg, SymmetricEigenvaluesOfDiagonalAndKnownMatrix) {
  Matrix m(3, 3, 0.0);
  m(0, 0) = 3;
  m(1, 1) = -1;
  m(2, 2) = 2;
  const Vector ev = symmetric_eigenvalues(m);
  EXPECT_NEAR(ev[0], -1, 1e-14);
  EXPECT_NEAR(ev[1], 2, 1e-14);
  EXPECT_NEAR(ev[2], 3, 1e-14);
  // [[2,1],[1,2]] has eigenvalues 1 and 3.
  Matrix p(2, 2, 1.0);
  p(0, 0) = p(1, 1) = 2;
  const Vector pv = symmetric_eigenvalues(p);
  EXPECT_NEAR(pv[0], 1, 1e-13);
  EXPECT_NEAR(pv[1], 3, 1e-13);
}

TEST(Linalg, GramLambdaMaxMatchesJacobi) {
  const Matrix g = random_gaussian(10, 6, 10);
  std::vector<std::size_t> all = {0, 1, 2, 3, 4, 5};
  const double jac = gram_extreme_eigs(g, all).lambda_max * 10.0;
  EXPECT_NEAR(gram_lambda_max(g, 500), jac, 1e-6 * jac);
}

TEST(Linalg, ProjectL1InsideUnchangedAndRay) {
  const Vector inside = {0.2, -0.3};
  EXPECT_EQ(project_l1_ball(inside, 1.0), inside);
  const Vector p = project_l1_ball(Vector{2.0, 0.0}, 1.0);
  EXPECT_NEAR(p[0], 1.0, 1e-15);
  EXPECT_EQ(p[1], 0.0);
}

TEST(Linalg, ProjectL1MatchesBreakpointOracle) {
  RngState rng{11};
  for (int t = 0; t < 200; ++t) {
    Vector x = random_vector(10, rng);
    for (double& v : x) v *= 2.0;
    const Vector p = project_l1_ball(x, 1.0);
    const auto q = oracle::l1_projection_by_breakpoints(x, 1.0);
    for (std::size_t i = 0; i < 10; ++i) ASSERT_NEAR(p[i], q[i], 1e-10);
    ASSERT_LE(norm1(p), 1.0 + 1e-12);
  }
}

TEST(Linalg, ProjectL1IdempotentAndNonExpansive) {
  RngState rng{12};
  for (int t = 0; t < 200; ++t) {
    Vector x = random_vector(7, rng), y = random_vector(7, rng);
    const Vector px = project_l1_ball(x, 1.5), py = project_l1_ball(y, 1.5);
    const Vector ppx = project_l1_ball(px, 1.5);
    for (std::size_t i = 0; i < 7; ++i) ASSERT_NEAR(ppx[i], px[i], 1e-12);
    Vector d1(7), d2(7);
    for (std::size_t i = 0; i < 7; ++i) {
      d1[i] = px[i] - py[i];
      d2[i] = x[i] - y[i];
    }
    ASSERT_LE(norm2(d1), norm2(d2) + 1e-12);
  }
}

TEST(Linalg, ProjectL2) {
  const Vector p = project_l2_ball(Vector{3.0, 4.0}, 1.0);
  EXPECT_NEAR(p[0], 0.6, 1e-15);
  EXPECT_NEAR(p[1], 0.8, 1e-15);
}

TEST(Linalg, SolveSquareDetectsSingular) {
  Matrix a(2, 2, 1.0);
  Vector x;
  EXPECT_FALSE(solve_square(a, Vector{1, 2}, x));
  a(1, 1) = 2.0;
  ASSERT_TRUE(solve_square(a, Vector{3, 5}, x));
  EXPECT_NEAR(x[0], 1.0, 1e-14);
  EXPECT_NEAR(x[1], 2.0, 1e-14);
}
