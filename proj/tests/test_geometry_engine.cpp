#include <cmath>

#include <gtest/gtest.h>

#include "igsoft/experiment.hpp"
#include "igsoft/geometry_engine.hpp"
#include "igsoft/models.hpp"

using namespace igsoft;

namespace {

template <class Model>
std::vector<Vec<Model::dim>> sample_points(std::size_t n)
{
  Vec<Model::dim> lo, hi;
  lo.fill(0.5);
  hi.fill(3.0);
  lo[0] = -3.0;
  hi[0] = 3.0;
  return detail::halton_points<Model::dim>(n, lo, hi);
}

}  // namespace

TEST(GeometryEngine, ChristoffelMatchesAnalytic3d)
{
  const auto G = christoffel_numeric(model_metric_field<Gaussian3D>(), Vec<3>{0, 1, 1}, 1e-5);
  EXPECT_LE(detail::max_abs_diff(G, Gaussian3D::christoffel({0, 1, 1})), 1e-6);
}

TEST(GeometryEngine, ChristoffelMatchesAnalytic2dAtSigma2)
{
  const auto G = christoffel_numeric(model_metric_field<Gaussian2D>(), Vec<2>{0, 2}, 1e-5);
  EXPECT_NEAR(G(1, 0, 0), 1.0 / 8, 1e-6);
}

TEST(GeometryEngine, FlatMetricHasNoCurvature)
{
  const auto f = flat_metric_field<3>();
  const Vec<3> p{0.3, -1.2, 4.0};
  for (double g : christoffel_numeric(f, p).c) EXPECT_NEAR(g, 0.0, 1e-10);
  const auto c = curvature_numeric(f, p);
  for (double r : c.riemann.c) EXPECT_NEAR(r, 0.0, 1e-10);
  EXPECT_NEAR(c.scalar, 0.0, 1e-10);
}

TEST(GeometryEngine, ScalarCurvatureAtSampledPoints)
{
  for (const auto& p : sample_points<Gaussian3D>(50))
    EXPECT_NEAR(scalar_numeric(model_metric_field<Gaussian3D>(), p), -1.0, 1e-4);
  for (const auto& p : sample_points<Gaussian2D>(50))
    EXPECT_NEAR(scalar_numeric(model_metric_field<Gaussian2D>(), p), -0.5, 1e-4);
}

TEST(GeometryEngine, RiemannComponentAndIdentities)
{
  for (const auto& p : sample_points<Gaussian3D>(20)) {
    const auto R = riemann_numeric(model_metric_field<Gaussian3D>(), p);
    const double expected = -1.0 / (p[1] * p[1]);
    EXPECT_NEAR(R(0, 1, 0, 1) / expected, 1.0, 1e-4);
    EXPECT_LE(antisymmetry_defect(R), 1e-6);
    EXPECT_LE(first_bianchi_defect(R), 1e-6);
  }
}

TEST(GeometryEngine, ChristoffelConvergesAtSecondOrder)
{
  const Vec<3> p{0.4, 1.3, 0.9};
  const auto exact = Gaussian3D::christoffel(p);
  const auto f = model_metric_field<Gaussian3D>();
  const double e1 = detail::max_abs_diff(christoffel_numeric(f, p, 1e-2), exact);
  const double e2 = detail::max_abs_diff(christoffel_numeric(f, p, 5e-3), exact);
  EXPECT_NEAR(e1 / e2, 4.0, 0.2);
}

TEST(GeometryEngine, StencilLeavingDomainThrows)
{
  EXPECT_THROW(christoffel_numeric(model_metric_field<Gaussian3D>(), Vec<3>{0, 1e-6, 1}, 1e-5), DomainError);
  EXPECT_THROW(curvature_numeric(model_metric_field<Gaussian2D>(), Vec<2>{0, 1e-4}), DomainError);
}
