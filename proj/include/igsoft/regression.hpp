#pragma once

#include <array>
#include <cmath>
#include <span>
#include <stdexcept>

namespace igsoft {

struct LinearFit
{
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

/// Ordinary least squares y = intercept + slope * x. Centered sums for stability.
inline LinearFit fit_line(std::span<const double> x, std::span<const double> y)
{
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fit_line: need >= 2 paired samples");
  const double n = double(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) throw std::domain_error("fit_line: non-finite sample");
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_line: degenerate abscissae");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r_squared = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return f;
}

/// Least squares y = c0 * b0(x) + c1 * b1(x) for two arbitrary basis columns.
inline std::array<double, 2> fit_two_basis(std::span<const double> b0, std::span<const double> b1,
                                           std::span<const double> y)
{
  double a00 = 0, a01 = 0, a11 = 0, r0 = 0, r1 = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    a00 += b0[i] * b0[i];
    a01 += b0[i] * b1[i];
    a11 += b1[i] * b1[i];
    r0 += b0[i] * y[i];
    r1 += b1[i] * y[i];
  }
  const double det = a00 * a11 - a01 * a01;
  if (det == 0.0) throw std::invalid_argument("fit_two_basis: singular normal equations");
  return {(a11 * r0 - a01 * r1) / det, (a00 * r1 - a01 * r0) / det};
}

}  // namespace igsoft
