#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace igsoft {

/// Pairwise (cascade) summation. Fixed association order, so results are
/// reproducible regardless of how the terms were produced.
inline double pairwise_sum(std::span<const double> v)
{
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t h = v.size() / 2;
  return pairwise_sum(v.first(h)) + pairwise_sum(v.subspan(h));
}

struct QuadratureRule
{
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Hermite nodes and weights for the weight exp(-u^2) on (-inf, inf).
/// Newton iteration on the orthonormal Hermite recurrence.
inline QuadratureRule gauss_hermite(std::size_t n)
{
  if (n < 1) throw std::invalid_argument("gauss_hermite: n must be >= 1");
  QuadratureRule r;
  r.nodes.assign(n, 0.0);
  r.weights.assign(n, 0.0);
  const double pim4 = std::pow(std::numbers::pi, -0.25);
  const std::size_t m = (n + 1) / 2;
  double z = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    // initial guesses for the largest roots first
    if (i == 0)
      z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -0.16667);
    else if (i == 1)
      z -= 1.14 * std::pow(double(n), 0.426) / z;
    else if (i == 2)
      z = 1.86 * z - 0.86 * r.nodes[0];
    else if (i == 3)
      z = 1.91 * z - 0.91 * r.nodes[1];
    else
      z = 2.0 * z - r.nodes[i - 2];

    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = pim4, p2 = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / (j + 1.0)) * p2 - std::sqrt(double(j) / (j + 1.0)) * p3;
      }
      pp = std::sqrt(2.0 * n) * p2;
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) <= 1e-15 * std::max(1.0, std::abs(z))) break;
    }
    r.nodes[i] = z;
    r.nodes[n - 1 - i] = -z;
    r.weights[i] = r.weights[n - 1 - i] = 2.0 / (pp * pp);
  }
  return r;
}

/// Gauss-Legendre nodes and weights on [a, b].
inline QuadratureRule gauss_legendre(std::size_t n, double a = -1.0, double b = 1.0)
{
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
  QuadratureRule r;
  r.nodes.assign(n, 0.0);
  r.weights.assign(n, 0.0);
  const double xm = 0.5 * (b + a), xl = 0.5 * (b - a);
  const std::size_t m = (n + 1) / 2;
  for (std::size_t i = 0; i < m; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = 1.0, p2 = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1.0);
      }
      pp = n * (z * p1 - p2) / (z * z - 1.0);
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) <= 1e-15) break;
    }
    r.nodes[i] = xm - xl * z;
    r.nodes[n - 1 - i] = xm + xl * z;
    r.weights[i] = r.weights[n - 1 - i] = 2.0 * xl / ((1.0 - z * z) * pp * pp);
  }
  return r;
}

/// Composite Simpson rule of f on [a, b] with `intervals` subintervals (rounded up to even).
template <class F>
double composite_simpson(F&& f, double a, double b, std::size_t intervals)
{
  if (intervals < 2) intervals = 2;
  if (intervals % 2) ++intervals;
  const double h = (b - a) / double(intervals);
  std::vector<double> terms(intervals + 1);
  for (std::size_t i = 0; i <= intervals; ++i) {
    const double w = (i == 0 || i == intervals) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    terms[i] = w * f(a + h * double(i));
  }
  return pairwise_sum(terms) * h / 3.0;
}

}  // namespace igsoft
