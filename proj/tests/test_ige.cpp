#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "igsoft/ige.hpp"

using namespace igsoft;

namespace {

const GeodesicSpec3D kUnit3(0.0, 1.0, 1.0, 1.0, 1.0);
const GeodesicSpec2D kUnit2(0.0, 1.0, 1.0);

}  // namespace

TEST(Ige, FisherDensityIsSqrtDet)
{
  const Vec<3> p3{0.3, 1.7, 0.4};
  EXPECT_NEAR(fisher_density<Gaussian3D>(p3), std::sqrt(metric3d(ParameterPoint3D(p3)).det()), 1e-13);
  const Vec<2> p2{0.3, 1.7};
  EXPECT_NEAR(fisher_density<Gaussian2D>(p2), std::sqrt(metric2d(ParameterPoint2D(p2)).det()), 1e-13);
}

TEST(Ige, BoxVolumeDegenerateAndMonotone)
{
  EXPECT_NEAR(box_volume(closed_form_path(kUnit3), 1e-9).value, 0.0, 1e-7);
  double prev = 0.0;
  for (double tau = 0.5; tau < 20; tau += 0.5) {
    const double v = box_volume(closed_form_path(kUnit3), tau).value;
    EXPECT_GT(v, prev);
    prev = v;
  }
}

TEST(Ige, FactorisedVolumeMatchesQuadrature)
{
  for (double tau : {0.5, 2.0, 6.0}) {
    const auto p3 = closed_form_path(kUnit3);
    const double v3 = box_volume(p3, tau).value;
    EXPECT_NEAR(box_volume_quadrature<Gaussian3D>(p3(0.0), p3(tau)) / v3, 1.0, 1e-8) << tau;
    const auto p2 = closed_form_path(kUnit2);
    const double v2 = box_volume(p2, tau).value;
    EXPECT_NEAR(box_volume_quadrature<Gaussian2D>(p2(0.0), p2(tau)) / v2, 1.0, 1e-8) << tau;
  }
}

TEST(Ige, AveragedVolumeSelfConvergence)
{
  const auto path = closed_form_path(kUnit3);
  const double a = averaged_volume(path, 10.0, 2048).value;
  const double b = averaged_volume(path, 10.0, 4096).value;
  EXPECT_LT(std::abs(a / b - 1.0), 1e-6);
}

TEST(Ige, ClosedFormVolumeOnTailWindow)
{
  const double g3 = max_relative_volume_gap<3>(closed_form_path(kUnit3, MeanPathForm::reference), kUnit3.rate(),
                                               [](double t) { return closed_form_volume_3d(kUnit3, t); }, 20, 50);
  EXPECT_LT(g3, 0.05);
  const double g2 = max_relative_volume_gap<2>(closed_form_path(kUnit2), kUnit2.rate(),
                                               [](double t) { return closed_form_volume_2d(kUnit2, t); }, 20, 50);
  EXPECT_LT(g2, 0.05);
}

TEST(Ige, AsymptoticForms)
{
  for (double tau : {20.0, 40.0}) {
    EXPECT_NEAR(closed_form_volume_2d_asymptotic(kUnit2, tau), 2 * std::exp(tau) / tau, 1e-12 * std::exp(tau));
    EXPECT_NEAR(closed_form_volume_2d(kUnit2, tau) / closed_form_volume_2d_asymptotic(kUnit2, tau), 1.0, 1e-12);
    EXPECT_NEAR(closed_form_volume_3d(kUnit3, tau) / closed_form_volume_3d_asymptotic(kUnit3, tau), 1.0, 0.1);
  }
  EXPECT_THROW(closed_form_volume_3d(kUnit3, 0.0), DomainError);
}

TEST(Ige, EntropySlopesAndRatio)
{
  const auto r = softening_ratio_ige(kUnit3);
  EXPECT_NEAR(r.ige3d.fit.slope / kUnit3.rate(), 1.0, 0.02);
  EXPECT_NEAR(r.ige2d.fit.slope / (kUnit3.rate() / std::numbers::sqrt2), 1.0, 0.02);
  EXPECT_NEAR(r.ratio * std::numbers::sqrt2, 1.0, 0.01);
  EXPECT_LT(r.ratio, 1.0);
  for (std::size_t i = 1; i < r.ige3d.entropy.size(); ++i) {
    if (r.ige3d.tau[i] * kUnit3.rate() < 20) continue;
    EXPECT_GT(r.ige3d.entropy[i], r.ige3d.entropy[i - 1]);
    EXPECT_GT(r.ige2d.entropy[i], r.ige2d.entropy[i - 1]);
  }
}

TEST(Ige, RatioInvariantUnderSigma0)
{
  double lo = 1e9, hi = -1e9;
  for (double s0 : {0.5, 1.0, 2.0}) {
    const double ratio = softening_ratio_ige(GeodesicSpec3D(0.0, s0, 1.0, 1.0, 1.0)).ratio;
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
  }
  EXPECT_LT((hi - lo) / lo, 0.01);
}

TEST(Ige, InvalidWindow)
{
  IgeOptions o;
  o.window_lo = 10;
  o.window_hi = 5;
  EXPECT_THROW(ige(kUnit3, o), DomainError);
}
