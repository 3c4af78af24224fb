#include <gtest/gtest.h>

#include "igsoft/fisher.hpp"

using namespace igsoft;

namespace {

template <std::size_t N>
void expect_matrix_near(const Matrix<N>& a, const Matrix<N>& b, double tol)
{
  for (std::size_t i = 0; i < N * N; ++i) EXPECT_NEAR(a.a[i], b.a[i], tol) << "entry " << i;
}

}  // namespace

TEST(Fisher, ThreeDimensionalAtUnitSigma)
{
  const auto f = fisher_numeric_3d({0, 1, 1});
  EXPECT_TRUE(f.converged) << f.diagnostic;
  expect_matrix_near(f.metric, Matrix<3>::diagonal({1, 2, 2}), 1e-8);
  EXPECT_NEAR(f.metric(0, 1), 0.0, 1e-10);
  EXPECT_NEAR(f.metric(1, 2), 0.0, 1e-10);
  for (double m : f.score_mean) EXPECT_NEAR(m, 0.0, 1e-10);
}

TEST(Fisher, ThreeDimensionalScaled)
{
  const auto f = fisher_numeric_3d({5, 2, 0.5});
  expect_matrix_near(f.metric, Matrix<3>::diagonal({0.25, 0.5, 8}), 1e-8);
}

TEST(Fisher, TwoDimensionalIndependentOfCapitalSigma)
{
  for (double S2 : {1.0, 3.0, 0.2}) {
    expect_matrix_near(fisher_numeric_2d({0, 1}, Model2DConfig(S2)).metric, Matrix<2>::diagonal({1, 4}), 1e-8);
    expect_matrix_near(fisher_numeric_2d({2, 2}, Model2DConfig(S2)).metric, Matrix<2>::diagonal({0.25, 1}), 1e-8);
  }
}

TEST(Fisher, TruncatedGridAgreesWithHermite)
{
  const QuadratureSpec grid(QuadratureScheme::truncated_grid, 256, 10.0);
  const auto a = fisher_numeric_3d({1, 0.7, 1.9}, grid, 1e-6);
  const auto b = fisher_numeric_3d({1, 0.7, 1.9});
  expect_matrix_near(a.metric, b.metric, 1e-6);
}

TEST(Fisher, ScaleCovariance)
{
  // g_11 scales as 1/sigma_x^2.
  const double g1 = fisher_numeric_3d({0, 1, 1}).metric(0, 0);
  const double g3 = fisher_numeric_3d({0, 3, 1}).metric(0, 0);
  EXPECT_NEAR(g1 / g3, 9.0, 1e-8);
}

TEST(Fisher, QuadratureSpecValidation)
{
  EXPECT_THROW(QuadratureSpec(QuadratureScheme::gauss_hermite_product, 4), DomainError);
  EXPECT_THROW(QuadratureSpec(QuadratureScheme::truncated_grid, 64, 3.0), DomainError);
}
