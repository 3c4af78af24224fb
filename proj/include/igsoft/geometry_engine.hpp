#pragma once

// Finite-difference differential geometry of an arbitrary metric field.
// Used as an independent oracle for the closed-form model geometry.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "tensor.hpp"

namespace igsoft {

template <std::size_t N>
struct MetricField
{
  std::function<Matrix<N>(const Vec<N>&)> evaluate;
  /// Coordinates that must stay strictly positive (e.g. standard deviations).
  std::array<bool, N> positive{};

  MetricTensor<N> at(const Vec<N>& theta) const { return MetricTensor<N>(evaluate(theta)); }
};

template <class Model>
MetricField<Model::dim> model_metric_field()
{
  return {[](const Vec<Model::dim>& t) { return Model::metric(t); }, Model::positive};
}

template <std::size_t N>
MetricField<N> flat_metric_field()
{
  return {[](const Vec<N>&) { return Matrix<N>::identity(); }, {}};
}

struct FiniteDifferenceSteps
{
  /// Relative step for metric derivatives (Christoffels): h_k = h * max(1, |theta_k|).
  double christoffel = 1e-5;
  /// Relative step for Christoffel derivatives (Riemann). Larger than `christoffel`
  /// so nested-difference roundoff stays near 1e-8.
  double riemann = 1e-4;
};

namespace detail {

inline double fd_step(double h, double theta) { return h * std::max(1.0, std::abs(theta)); }

template <std::size_t N>
void check_fd_domain(const MetricField<N>& f, const Vec<N>& theta, double reach, const char* who)
{
  for (std::size_t k = 0; k < N; ++k) {
    if (!f.positive[k]) continue;
    if (!(theta[k] - reach * std::max(1.0, std::abs(theta[k])) > 0.0))
      throw DomainError(std::string(who) + ": finite-difference stencil crosses the boundary of coordinate " +
                        std::to_string(k) + " (theta=" + std::to_string(theta[k]) + ")");
  }
}

/// d_m g_ij by second-order central differences, stored [m][i*N+j].
template <std::size_t N>
std::array<Matrix<N>, N> metric_gradient(const MetricField<N>& f, const Vec<N>& theta, double h)
{
  std::array<Matrix<N>, N> dg;
  for (std::size_t m = 0; m < N; ++m) {
    const double step = fd_step(h, theta[m]);
    Vec<N> tp = theta, tm = theta;
    tp[m] += step;
    tm[m] -= step;
    const Matrix<N> gp = f.evaluate(tp), gm = f.evaluate(tm);
    for (std::size_t i = 0; i < N * N; ++i) dg[m].a[i] = (gp.a[i] - gm.a[i]) / (2.0 * step);
  }
  return dg;
}

template <std::size_t N>
ChristoffelSymbols<N> christoffel_unchecked(const MetricField<N>& f, const Vec<N>& theta, double h)
{
  const MetricTensor<N> g = f.at(theta);
  const auto dg = metric_gradient(f, theta, h);
  ChristoffelSymbols<N> G;
  for (std::size_t k = 0; k < N; ++k)
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t j = i; j < N; ++j) {
        double s = 0.0;
        for (std::size_t m = 0; m < N; ++m)
          s += g.inv(k, m) * (dg[i](m, j) + dg[j](i, m) - dg[m](i, j));
        G.set_sym(k, i, j, 0.5 * s);
      }
  return G;
}

}  // namespace detail

/// Gamma^k_ij = 1/2 g^km (d_i g_mj + d_j g_im - d_m g_ij) with central differences of g.
template <std::size_t N>
ChristoffelSymbols<N> christoffel_numeric(const MetricField<N>& f, const Vec<N>& theta, double h = 1e-5)
{
  detail::check_fd_domain(f, theta, 2.0 * h, "christoffel_numeric");
  return detail::christoffel_unchecked(f, theta, h);
}

/// d_m Gamma^k_ij by central differences of the numeric Christoffels.
template <std::size_t N>
ChristoffelGradient<N> christoffel_gradient_numeric(const MetricField<N>& f, const Vec<N>& theta,
                                                    const FiniteDifferenceSteps& steps = {})
{
  detail::check_fd_domain(f, theta, 2.0 * (steps.riemann + steps.christoffel), "christoffel_gradient_numeric");
  ChristoffelGradient<N> dG;
  for (std::size_t m = 0; m < N; ++m) {
    const double step = detail::fd_step(steps.riemann, theta[m]);
    Vec<N> tp = theta, tm = theta;
    tp[m] += step;
    tm[m] -= step;
    const auto Gp = detail::christoffel_unchecked(f, tp, steps.christoffel);
    const auto Gm = detail::christoffel_unchecked(f, tm, steps.christoffel);
    for (std::size_t k = 0; k < N; ++k)
      for (std::size_t i = 0; i < N; ++i)
        for (std::size_t j = 0; j < N; ++j) dG(k, i, j, m) = (Gp(k, i, j) - Gm(k, i, j)) / (2.0 * step);
  }
  return dG;
}

template <std::size_t N>
RiemannTensor<N> riemann_numeric(const MetricField<N>& f, const Vec<N>& theta, const FiniteDifferenceSteps& steps = {})
{
  const auto G = christoffel_numeric(f, theta, steps.christoffel);
  const auto dG = christoffel_gradient_numeric(f, theta, steps);
  return riemann_from_connection(G, dG);
}

template <std::size_t N>
RicciTensor<N> ricci_numeric(const MetricField<N>& f, const Vec<N>& theta, const FiniteDifferenceSteps& steps = {})
{
  return contract_ricci(riemann_numeric(f, theta, steps));
}

template <std::size_t N>
double scalar_numeric(const MetricField<N>& f, const Vec<N>& theta, const FiniteDifferenceSteps& steps = {})
{
  return contract_scalar(ricci_numeric(f, theta, steps), f.at(theta).upper());
}

/// Riemann, Ricci and scalar in one pass (one Riemann evaluation).
template <std::size_t N>
CurvatureSet<N> curvature_numeric(const MetricField<N>& f, const Vec<N>& theta, const FiniteDifferenceSteps& steps = {})
{
  CurvatureSet<N> c;
  c.riemann = riemann_numeric(f, theta, steps);
  c.ricci = contract_ricci(c.riemann);
  c.scalar = contract_scalar(c.ricci, f.at(theta).upper());
  return c;
}

/// max |R^a_{m[nr]} + R^a_{n[rm]} + R^a_{r[mn]}| over all index choices.
template <std::size_t N>
double first_bianchi_defect(const RiemannTensor<N>& R)
{
  double worst = 0.0;
  for (std::size_t a = 0; a < N; ++a)
    for (std::size_t m = 0; m < N; ++m)
      for (std::size_t n = 0; n < N; ++n)
        for (std::size_t r = 0; r < N; ++r)
          worst = std::max(worst, std::abs(R(a, m, n, r) + R(a, n, r, m) + R(a, r, m, n)));
  return worst;
}

/// max |R^a_{mnr} + R^a_{mrn}|
template <std::size_t N>
double antisymmetry_defect(const RiemannTensor<N>& R)
{
  double worst = 0.0;
  for (std::size_t a = 0; a < N; ++a)
    for (std::size_t m = 0; m < N; ++m)
      for (std::size_t n = 0; n < N; ++n)
        for (std::size_t r = 0; r < N; ++r) worst = std::max(worst, std::abs(R(a, m, n, r) + R(a, m, r, n)));
  return worst;
}

}  // namespace igsoft
