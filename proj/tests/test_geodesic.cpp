#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "igsoft/geodesic.hpp"

using namespace igsoft;

namespace {

const GeodesicSpec3D kUnit3(0.0, 1.0, 1.0, 1.0, 1.0);

}  // namespace

TEST(Geodesic, RhsValues)
{
  const auto a = geodesic_rhs<Gaussian3D>({0, 1, 1}, {1, 0, 0});
  EXPECT_DOUBLE_EQ(a[0], 0.0);
  EXPECT_DOUBLE_EQ(a[1], -0.5);
  EXPECT_DOUBLE_EQ(a[2], 0.0);
  for (double x : geodesic_rhs<Gaussian3D>({2, 1.5, 0.3}, {0, 0, 0})) EXPECT_EQ(x, 0.0);
  EXPECT_DOUBLE_EQ(geodesic_rhs<Gaussian2D>({0, 1}, {2, 0})[1], -1.0);
}

TEST(Geodesic, ClosedFormInitialValuesAndLimits)
{
  const GeodesicSpec3D s(1.5, 0.8, 2.0, 1.3, 0.7);
  const auto p0 = closed_form_3d(s, 0.0);
  EXPECT_DOUBLE_EQ(p0.theta[0], 1.5);
  EXPECT_DOUBLE_EQ(p0.theta[1], 0.8);
  EXPECT_DOUBLE_EQ(p0.theta[2], 2.0);
  const auto far = closed_form_3d(s, 200.0, MeanPathForm::reference);
  EXPECT_NEAR(far.theta[0], 1.5 + 2 * 0.8, 1e-12);
  EXPECT_LT(far.theta[1], 1e-50);
  EXPECT_LT(far.theta[2], 1e-50);
  const auto p2 = closed_form_2d(GeodesicSpec2D(1.5, 0.8, 1.0), 0.0);
  EXPECT_DOUBLE_EQ(p2.theta[0], 1.5);
  EXPECT_DOUBLE_EQ(p2.theta[1], 0.8);
}

TEST(Geodesic, ReferencePathAtTauOne)
{
  const double e = std::numbers::e;
  const auto p = closed_form_3d(kUnit3, 1.0, MeanPathForm::reference);
  EXPECT_NEAR(p.theta[1], 2 * e / (1 + e * e), 1e-14);
  EXPECT_NEAR(p.theta[1], 0.64805427, 1e-8);
  EXPECT_NEAR(p.theta[0], (2 * (1 + e * e) - 4) / (1 + e * e), 1e-14);
  EXPECT_NEAR(p.theta[0], 1.52318831, 1e-8);
}

TEST(Geodesic, TwoDimensionalDependsOnRateOnly)
{
  const double e = std::numbers::e;
  const auto p = closed_form_2d(GeodesicSpec2D(0, 1, 1 / std::numbers::sqrt2), std::numbers::sqrt2);
  EXPECT_NEAR(p.theta[1], 2 * e / (1 + e * e), 1e-14);
  for (double tau : {0.3, 1.0, 4.0}) {
    const auto a = closed_form_2d(GeodesicSpec2D(0.2, 1.1, 0.9), tau);
    const auto b = closed_form_3d(GeodesicSpec3D(0.2, 1.1, 1.0, 0.9, 1.0), tau, MeanPathForm::reference);
    EXPECT_NEAR(a.theta[0], b.theta[0], 1e-14);
    EXPECT_NEAR(a.theta[1], b.theta[1], 1e-14);
  }
}

TEST(Geodesic, SigmaDecreasesAndMeanFirstIntegral)
{
  double prev = 2.0;
  for (double tau = 0.1; tau < 10; tau += 0.1) {
    const auto p = closed_form_3d(kUnit3, tau);
    EXPECT_LT(p.theta[1], prev);
    prev = p.theta[1];
    // mu' / sigma_x^2 is conserved along the exact family.
    const auto q = closed_form_3d(kUnit3, 0.0);
    EXPECT_NEAR(p.velocity[0] / (p.theta[1] * p.theta[1]), q.velocity[0] / (q.theta[1] * q.theta[1]), 1e-12);
  }
}

TEST(Geodesic, IntegrationMatchesClosedForm3d)
{
  const auto grid = uniform_grid(0, 10, 201);
  const auto tr = integrate_geodesic(kUnit3, 10.0, 1e-10, grid);
  ASSERT_FALSE(tr.aborted) << tr.abort_reason;
  EXPECT_LT(max_deviation(tr, closed_form_path(kUnit3)), 1e-8);
  EXPECT_LT(max_speed_drift<Gaussian3D>(tr), 1e-6);
}

TEST(Geodesic, IntegrationMatchesClosedForm2d)
{
  const auto s = GeodesicSpec2D::coupled_to(kUnit3);
  const auto tr = integrate_geodesic(s, 10.0, 1e-10, uniform_grid(0, 10, 201));
  ASSERT_FALSE(tr.aborted) << tr.abort_reason;
  EXPECT_LT(max_deviation(tr, closed_form_path(s)), 1e-8);
  EXPECT_LT(max_speed_drift<Gaussian2D>(tr), 1e-6);
}

TEST(Geodesic, ClosedFormResiduals)
{
  const auto grid = uniform_grid(0, 10, 100);
  const auto exact = residual_check<Gaussian3D>(closed_form_path(kUnit3), grid);
  EXPECT_LT(exact.max_residual, 1e-6);
  EXPECT_LT(exact.per_component[2], 1e-8);
  EXPECT_LT(residual_check<Gaussian2D>(closed_form_path(GeodesicSpec2D(0, 1, 1)), grid).max_residual, 1e-6);
  // The reference mean path does not solve the sigma_x equation.
  EXPECT_GT(residual_check<Gaussian3D>(closed_form_path(kUnit3, MeanPathForm::reference), grid).max_residual, 0.1);
}

TEST(Geodesic, CoupledSpecAndHorizon)
{
  const auto s2 = GeodesicSpec2D::coupled_to(GeodesicSpec3D(1, 2, 1, 1.4, 1));
  EXPECT_NEAR(s2.lambda_plus(), 1.4 / std::numbers::sqrt2, 1e-15);
  EXPECT_EQ(s2.mu0(), 1.0);
  EXPECT_EQ(s2.sigma0(), 2.0);
  const auto h = GeodesicSpec3D::from_horizon(0, 1, 0.8, 1, 20, 1e-4);
  EXPECT_NEAR(h.lambda_f(), std::log(0.8 / 1e-4) / 20, 1e-15);
  EXPECT_NEAR(closed_form_3d(h, 20.0).theta[2], 1e-4, 1e-16);
  EXPECT_THROW(GeodesicSpec3D::from_horizon(0, 1, 0.8, 1, 20, 0.9), DomainError);
  EXPECT_THROW(GeodesicSpec3D(0, -1, 1, 1, 1), DomainError);
}

TEST(Geodesic, ToleranceRange)
{
  EXPECT_THROW(integrate_geodesic(kUnit3, 1.0, 1e-3), DomainError);
  EXPECT_THROW(integrate_geodesic(kUnit3, 1.0, 1e-15), DomainError);
}
