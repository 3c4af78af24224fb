#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "igsoft/models.hpp"
#include "igsoft/quadrature.hpp"

using namespace igsoft;

namespace {

constexpr double kPi = std::numbers::pi;

// Integral of a density over a wide Gauss-Legendre box.
template <class Pdf>
double integrate2(Pdf&& pdf, double cx, double sx, double sy)
{
  const auto rx = gauss_legendre(200, cx - 12 * sx, cx + 12 * sx);
  const auto ry = gauss_legendre(200, -12 * sy, 12 * sy);
  double s = 0.0;
  for (std::size_t i = 0; i < rx.nodes.size(); ++i)
    for (std::size_t j = 0; j < ry.nodes.size(); ++j)
      s += rx.weights[i] * ry.weights[j] * pdf(MicroSample{rx.nodes[i], ry.nodes[j]});
  return s;
}

}  // namespace

TEST(Models, Pdf3dValues)
{
  EXPECT_NEAR(pdf3d({0, 1, 1}, {0, 0}), 1.0 / (2 * kPi), 1e-15);
  EXPECT_NEAR(pdf3d({2, 3, 0.5}, {2, 0}), 1.0 / (2 * kPi * 1.5), 1e-15);
  EXPECT_NEAR(integrate2([](MicroSample s) { return pdf3d({0, 1, 1}, s); }, 0, 1, 1), 1.0, 1e-12);
}

TEST(Models, Pdf2dValuesAndConstraint)
{
  EXPECT_NEAR(pdf2d({0, 1}, Model2DConfig(1.0), {0, 0}), 1.0 / (2 * kPi), 1e-15);
  const ParameterPoint2D t(0.7, 1.3);
  const Model2DConfig cfg(2.5);
  const double sy = cfg.capital_sigma_sq() / t.sigma();
  EXPECT_NEAR(integrate2([&](MicroSample s) { return pdf2d(t, cfg, s); }, 0.7, 1.3, sy), 1.0, 1e-12);
  for (double x : {-1.0, 0.2, 3.0})
    for (double y : {-2.0, 0.0, 1.1})
      EXPECT_NEAR(pdf2d(t, cfg, {x, y}), pdf3d({0.7, 1.3, sy}, {x, y}), 1e-15);
}

TEST(Models, ParameterValidation)
{
  EXPECT_THROW(ParameterPoint3D(0, 0, 1), DomainError);
  EXPECT_THROW(ParameterPoint3D(0, 1, -1), DomainError);
  EXPECT_THROW(ParameterPoint3D(NAN, 1, 1), DomainError);
  EXPECT_THROW(ParameterPoint2D(0, 0), DomainError);
  EXPECT_THROW(Model2DConfig(0.0), DomainError);
}

TEST(Models, Metric3d)
{
  const auto g1 = metric3d({7, 1, 1});
  EXPECT_EQ(g1.lower().a, (Matrix<3>::diagonal({1, 2, 2}).a));
  const auto g2 = metric3d({-3, 2, 1});
  EXPECT_EQ(g2.lower().a, (Matrix<3>::diagonal({0.25, 0.5, 2}).a));
  const auto g3 = metric3d({5, 2, 0.5});
  EXPECT_EQ(g3.lower().a, (Matrix<3>::diagonal({0.25, 0.5, 8}).a));
  EXPECT_NEAR(metric3d({0, 1.5, 0.7}).det(), 4.0 / (std::pow(1.5, 4) * 0.49), 1e-14);
}

TEST(Models, Metric2d)
{
  EXPECT_EQ(metric2d({0, 1}).lower().a, (Matrix<2>::diagonal({1, 4}).a));
  EXPECT_EQ(metric2d({0, 2}).lower().a, (Matrix<2>::diagonal({0.25, 1}).a));
  EXPECT_NEAR(metric2d({0, 1.7}).det(), 4.0 / std::pow(1.7, 4), 1e-14);
}

TEST(Models, Christoffel3dAtUnitSigma)
{
  const auto G = christoffel3d({0, 1, 1});
  EXPECT_DOUBLE_EQ(G(0, 0, 1), -1.0);
  EXPECT_DOUBLE_EQ(G(1, 0, 0), 0.5);
  EXPECT_DOUBLE_EQ(G(1, 1, 1), -1.0);
  EXPECT_DOUBLE_EQ(G(2, 2, 2), -1.0);
  for (std::size_t k = 0; k < 3; ++k)
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(G(k, i, j), G(k, j, i));
}

TEST(Models, Christoffel2dAtUnitSigma)
{
  const auto G = christoffel2d({0, 1});
  EXPECT_DOUBLE_EQ(G(0, 0, 1), -1.0);
  EXPECT_DOUBLE_EQ(G(1, 0, 0), 0.25);
  EXPECT_DOUBLE_EQ(G(1, 1, 1), -1.0);
  EXPECT_EQ(G(0, 1, 0), G(0, 0, 1));
}

TEST(Models, Curvature)
{
  EXPECT_EQ(Gaussian3D::scalar_curvature(), -1.0);
  EXPECT_EQ(Gaussian2D::scalar_curvature(), -0.5);
  for (double sx : {0.3, 1.0, 2.0, 7.5}) {
    EXPECT_NEAR(curvature3d({1, sx, 0.8}).scalar, -1.0, 1e-14);
    EXPECT_NEAR(curvature2d({1, sx}).scalar, -0.5, 1e-14);
  }
  const auto c = curvature3d({0, 2, 1});
  EXPECT_NEAR(c.ricci(0, 0), -1.0 / 8, 1e-15);
  EXPECT_NEAR(c.ricci(1, 1), -1.0 / 4, 1e-15);
  EXPECT_NEAR(c.riemann(0, 1, 0, 1), -1.0 / 4, 1e-15);
}
