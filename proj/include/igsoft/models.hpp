#pragma once

// The two uncorrelated Gaussian statistical models and their closed-form geometry.
//
//   3D model: theta = (mu_x, sigma_x, sigma_y)
//       p(x, y) = exp(-(x - mu_x)^2 / (2 sigma_x^2) - y^2 / (2 sigma_y^2)) / (2 pi sigma_x sigma_y)
//   2D model: theta = (mu_x, sigma), obtained from the 3D model under sigma_x sigma_y = Sigma^2
//       p(x, y) = exp(-(x - mu_x)^2 / (2 sigma^2) - sigma^2 y^2 / (2 Sigma^4)) / (2 pi Sigma^2)
//
// Coordinates are zero-based in code: index 0 is mu_x, 1 is sigma_x (or sigma), 2 is sigma_y.

#include <cmath>
#include <numbers>
#include <string>

#include "tensor.hpp"

namespace igsoft {

struct MicroSample
{
  double x = 0.0;
  double y = 0.0;
};

namespace detail {

inline double require_positive(double v, const char* what)
{
  if (!(v > 0.0) || !std::isfinite(v)) throw DomainError(std::string(what) + " must be a finite positive real");
  return v;
}

inline double require_finite(double v, const char* what)
{
  if (!std::isfinite(v)) throw DomainError(std::string(what) + " must be finite");
  return v;
}

}  // namespace detail

class ParameterPoint3D
{
 public:
  ParameterPoint3D(double mu_x, double sigma_x, double sigma_y)
      : mu_x_(detail::require_finite(mu_x, "mu_x")),
        sigma_x_(detail::require_positive(sigma_x, "sigma_x")),
        sigma_y_(detail::require_positive(sigma_y, "sigma_y"))
  {
  }

  explicit ParameterPoint3D(const Vec<3>& v) : ParameterPoint3D(v[0], v[1], v[2]) {}

  double mu_x() const { return mu_x_; }
  double sigma_x() const { return sigma_x_; }
  double sigma_y() const { return sigma_y_; }
  Vec<3> vec() const { return {mu_x_, sigma_x_, sigma_y_}; }

 private:
  double mu_x_;
  double sigma_x_;
  double sigma_y_;
};

class ParameterPoint2D
{
 public:
  ParameterPoint2D(double mu_x, double sigma)
      : mu_x_(detail::require_finite(mu_x, "mu_x")), sigma_(detail::require_positive(sigma, "sigma"))
  {
  }

  explicit ParameterPoint2D(const Vec<2>& v) : ParameterPoint2D(v[0], v[1]) {}

  double mu_x() const { return mu_x_; }
  double sigma() const { return sigma_; }
  Vec<2> vec() const { return {mu_x_, sigma_}; }

 private:
  double mu_x_;
  double sigma_;
};

/// The constant Sigma^2 of the macroscopic constraint sigma_x sigma_y = Sigma^2.
class Model2DConfig
{
 public:
  explicit Model2DConfig(double capital_sigma_sq = 1.0)
      : capital_sigma_sq_(detail::require_positive(capital_sigma_sq, "Sigma^2"))
  {
  }

  double capital_sigma_sq() const { return capital_sigma_sq_; }

 private:
  double capital_sigma_sq_;
};

inline double pdf3d(const ParameterPoint3D& t, const MicroSample& s)
{
  const double dx = s.x - t.mu_x();
  const double e = -dx * dx / (2.0 * t.sigma_x() * t.sigma_x()) - s.y * s.y / (2.0 * t.sigma_y() * t.sigma_y());
  return std::exp(e) / (2.0 * std::numbers::pi * t.sigma_x() * t.sigma_y());
}

inline double pdf2d(const ParameterPoint2D& t, const Model2DConfig& cfg, const MicroSample& s)
{
  const double S2 = cfg.capital_sigma_sq();
  const double dx = s.x - t.mu_x();
  const double e = -dx * dx / (2.0 * t.sigma() * t.sigma()) - t.sigma() * t.sigma() * s.y * s.y / (2.0 * S2 * S2);
  return std::exp(e) / (2.0 * std::numbers::pi * S2);
}

/// Closed-form geometry of the 3D model. Static functions take raw coordinate
/// vectors so the integrators can call them without re-validating each step;
/// the typed wrappers below validate.
struct Gaussian3D
{
  static constexpr std::size_t dim = 3;
  static constexpr const char* name = "3D";
  /// Coordinates constrained to be positive (sigma_x, sigma_y).
  static constexpr std::array<bool, 3> positive = {false, true, true};

  static Matrix<3> metric(const Vec<3>& t)
  {
    const double sx2 = t[1] * t[1], sy2 = t[2] * t[2];
    return Matrix<3>::diagonal({1.0 / sx2, 2.0 / sx2, 2.0 / sy2});
  }

  static ChristoffelSymbols<3> christoffel(const Vec<3>& t)
  {
    const double sx = t[1], sy = t[2];
    ChristoffelSymbols<3> G;
    G.set_sym(0, 0, 1, -1.0 / sx);
    G(1, 0, 0) = 1.0 / (2.0 * sx);
    G(1, 1, 1) = -1.0 / sx;
    G(2, 2, 2) = -1.0 / sy;
    return G;
  }

  static ChristoffelGradient<3> christoffel_gradient(const Vec<3>& t)
  {
    const double sx2 = t[1] * t[1], sy2 = t[2] * t[2];
    ChristoffelGradient<3> d;
    d(0, 0, 1, 1) = d(0, 1, 0, 1) = 1.0 / sx2;
    d(1, 0, 0, 1) = -1.0 / (2.0 * sx2);
    d(1, 1, 1, 1) = 1.0 / sx2;
    d(2, 2, 2, 2) = 1.0 / sy2;
    return d;
  }

  /// Nonzero mixed components: R^1_212 = -1/sx^2 and R^2_121 = -1/(2 sx^2), plus their
  /// antisymmetric partners (one-based indices as in the usual notation).
  static RiemannTensor<3> riemann(const Vec<3>& t)
  {
    const double sx2 = t[1] * t[1];
    RiemannTensor<3> R;
    R(0, 1, 0, 1) = -1.0 / sx2;
    R(0, 1, 1, 0) = 1.0 / sx2;
    R(1, 0, 1, 0) = -1.0 / (2.0 * sx2);
    R(1, 0, 0, 1) = 1.0 / (2.0 * sx2);
    return R;
  }

  static RicciTensor<3> ricci(const Vec<3>& t)
  {
    const double sx2 = t[1] * t[1];
    RicciTensor<3> r;
    r.r(0, 0) = -1.0 / (2.0 * sx2);
    r.r(1, 1) = -1.0 / sx2;
    return r;
  }

  static constexpr double scalar_curvature() { return -1.0; }

  /// sqrt(det g) = 2 / (sigma_x^2 sigma_y)
  static double fisher_density(const Vec<3>& t) { return 2.0 / (t[1] * t[1] * t[2]); }
};

struct Gaussian2D
{
  static constexpr std::size_t dim = 2;
  static constexpr const char* name = "2D";
  static constexpr std::array<bool, 2> positive = {false, true};

  static Matrix<2> metric(const Vec<2>& t)
  {
    const double s2 = t[1] * t[1];
    return Matrix<2>::diagonal({1.0 / s2, 4.0 / s2});
  }

  static ChristoffelSymbols<2> christoffel(const Vec<2>& t)
  {
    const double s = t[1];
    ChristoffelSymbols<2> G;
    G.set_sym(0, 0, 1, -1.0 / s);
    G(1, 0, 0) = 1.0 / (4.0 * s);
    G(1, 1, 1) = -1.0 / s;
    return G;
  }

  static ChristoffelGradient<2> christoffel_gradient(const Vec<2>& t)
  {
    const double s2 = t[1] * t[1];
    ChristoffelGradient<2> d;
    d(0, 0, 1, 1) = d(0, 1, 0, 1) = 1.0 / s2;
    d(1, 0, 0, 1) = -1.0 / (4.0 * s2);
    d(1, 1, 1, 1) = 1.0 / s2;
    return d;
  }

  static RiemannTensor<2> riemann(const Vec<2>& t)
  {
    const double s2 = t[1] * t[1];
    RiemannTensor<2> R;
    R(0, 1, 0, 1) = -1.0 / s2;
    R(0, 1, 1, 0) = 1.0 / s2;
    R(1, 0, 1, 0) = -1.0 / (4.0 * s2);
    R(1, 0, 0, 1) = 1.0 / (4.0 * s2);
    return R;
  }

  static RicciTensor<2> ricci(const Vec<2>& t)
  {
    const double s2 = t[1] * t[1];
    RicciTensor<2> r;
    r.r(0, 0) = -1.0 / (4.0 * s2);
    r.r(1, 1) = -1.0 / s2;
    return r;
  }

  static constexpr double scalar_curvature() { return -0.5; }

  /// sqrt(det g) = 2 / sigma^2
  static double fisher_density(const Vec<2>& t) { return 2.0 / (t[1] * t[1]); }
};

template <class Model>
CurvatureSet<Model::dim> analytic_curvature(const Vec<Model::dim>& t)
{
  return {Model::riemann(t), Model::ricci(t), Model::scalar_curvature()};
}

inline MetricTensor<3> metric3d(const ParameterPoint3D& t) { return MetricTensor<3>(Gaussian3D::metric(t.vec())); }
inline MetricTensor<2> metric2d(const ParameterPoint2D& t) { return MetricTensor<2>(Gaussian2D::metric(t.vec())); }

inline ChristoffelSymbols<3> christoffel3d(const ParameterPoint3D& t) { return Gaussian3D::christoffel(t.vec()); }
inline ChristoffelSymbols<2> christoffel2d(const ParameterPoint2D& t) { return Gaussian2D::christoffel(t.vec()); }

inline CurvatureSet<3> curvature3d(const ParameterPoint3D& t) { return analytic_curvature<Gaussian3D>(t.vec()); }
inline CurvatureSet<2> curvature2d(const ParameterPoint2D& t) { return analytic_curvature<Gaussian2D>(t.vec()); }

}  // namespace igsoft
