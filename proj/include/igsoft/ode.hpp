#pragma once

// Dormand-Prince 5(4) with PI step-size control and the pair's native
// fourth-order continuous extension for output on a user grid.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "tensor.hpp"

namespace igsoft {

struct OdeOptions
{
  double rtol = 1e-10;
  double atol = 0.0;
  /// Per-component absolute tolerances; overrides `atol` when non-empty.
  std::vector<double> atol_components;
  /// Initial step; 0 selects one automatically.
  double h0 = 0.0;
  std::size_t max_steps = 10'000'000;
  /// Record every accepted step in addition to the output grid.
  bool record_steps = false;
};

template <std::size_t M>
struct OdeSolution
{
  std::vector<double> t;
  std::vector<Vec<M>> y;
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  bool aborted = false;
  std::string abort_reason;
};

namespace detail::dopri {

inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                        a65 = -5103.0 / 18656;
inline constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                        a76 = 11.0 / 84;
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                        e6 = 22.0 / 525, e7 = -1.0 / 40;
inline constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                        d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                        d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

}  // namespace detail::dopri

/// Continuous extension of one accepted step, valid on [t0, t0 + h].
template <std::size_t M>
struct DenseStep
{
  double t0 = 0.0, h = 0.0;
  std::array<Vec<M>, 5> r{};

  Vec<M> operator()(double t) const
  {
    const double s = (t - t0) / h, s1 = 1.0 - s;
    Vec<M> y;
    for (std::size_t i = 0; i < M; ++i)
      y[i] = r[0][i] + s * (r[1][i] + s1 * (r[2][i] + s * (r[3][i] + s1 * r[4][i])));
    return y;
  }
};

/// Integrates y' = f(t, y) from t0 to t1. `guard(t, y)` returns a non-empty
/// reason to stop; the offending step is discarded and the partial solution
/// is returned with `aborted` set. Output is recorded at t0, at every point of
/// `grid` inside (t0, t1], and at t1 (plus every step if requested).
template <std::size_t M, class Rhs, class Guard>
OdeSolution<M> integrate_dopri5(Rhs&& f, double t0, const Vec<M>& y0, double t1, const OdeOptions& opt,
                                std::span<const double> grid, Guard&& guard)
{
  using namespace detail::dopri;
  OdeSolution<M> sol;
  sol.t.push_back(t0);
  sol.y.push_back(y0);
  if (!(t1 > t0)) return sol;

  std::vector<double> out;
  for (double g : grid)
    if (g > t0 && g < t1) out.push_back(g);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  out.push_back(t1);
  std::size_t next_out = 0;

  if (!opt.atol_components.empty() && opt.atol_components.size() != M)
    throw std::invalid_argument("integrate_dopri5: atol_components size mismatch");
  auto atol = [&](std::size_t i) { return opt.atol_components.empty() ? opt.atol : opt.atol_components[i]; };

  auto err_norm = [&](const Vec<M>& y, const Vec<M>& yn, const Vec<M>& e) {
    double s = 0.0;
    for (std::size_t i = 0; i < M; ++i) {
      const double sc = std::max(atol(i) + opt.rtol * std::max(std::abs(y[i]), std::abs(yn[i])), 1e-300);
      const double r = e[i] / sc;
      s += r * r;
    }
    return std::sqrt(s / double(M));
  };

  Vec<M> y = y0;
  double t = t0;
  Vec<M> k1 = f(t, y);

  double h = opt.h0;
  if (h <= 0.0) {
    double ny = 0.0, nf = 0.0;
    for (std::size_t i = 0; i < M; ++i) {
      const double sc = std::max(atol(i) + opt.rtol * std::abs(y[i]), 1e-300);
      ny += (y[i] / sc) * (y[i] / sc);
      nf += (k1[i] / sc) * (k1[i] / sc);
    }
    ny = std::sqrt(ny / M);
    nf = std::sqrt(nf / M);
    h = (ny > 1e-5 && nf > 1e-5) ? 0.01 * ny / nf : 1e-6;
    h = std::min(h * std::pow(opt.rtol, 0.2), 0.1 * (t1 - t0));
    h = std::max(h, 1e-12 * (t1 - t0));
  }

  constexpr double safe = 0.9, beta = 0.04, expo1 = 0.2 - beta * 0.75, facc1 = 1.0 / 0.2, facc2 = 1.0 / 10.0;
  double facold = 1e-4;
  bool last_rejected = false;

  while (t < t1) {
    if (sol.accepted + sol.rejected >= opt.max_steps) {
      sol.aborted = true;
      sol.abort_reason = "maximum number of steps exceeded";
      return sol;
    }
    const double hmin = 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t));
    if (h < hmin) {
      sol.aborted = true;
      sol.abort_reason = "step size underflow at t=" + std::to_string(t);
      return sol;
    }
    if (t + h > t1) h = t1 - t;

    Vec<M> yt, k2, k3, k4, k5, k6, k7, y5, e;
    for (std::size_t i = 0; i < M; ++i) yt[i] = y[i] + h * a21 * k1[i];
    k2 = f(t + c2 * h, yt);
    for (std::size_t i = 0; i < M; ++i) yt[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    k3 = f(t + c3 * h, yt);
    for (std::size_t i = 0; i < M; ++i) yt[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    k4 = f(t + c4 * h, yt);
    for (std::size_t i = 0; i < M; ++i)
      yt[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    k5 = f(t + c5 * h, yt);
    for (std::size_t i = 0; i < M; ++i)
      yt[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    k6 = f(t + h, yt);
    for (std::size_t i = 0; i < M; ++i)
      y5[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
    k7 = f(t + h, y5);
    for (std::size_t i = 0; i < M; ++i)
      e[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);

    bool finite = true;
    for (std::size_t i = 0; i < M; ++i) finite = finite && std::isfinite(y5[i]) && std::isfinite(e[i]);
    const double err = finite ? err_norm(y, y5, e) : std::numeric_limits<double>::infinity();

    if (err <= 1.0) {
      if (std::string why = guard(t + h, y5); !why.empty()) {
        sol.aborted = true;
        sol.abort_reason = why;
        return sol;
      }
      DenseStep<M> d;
      d.t0 = t;
      d.h = h;
      for (std::size_t i = 0; i < M; ++i) {
        const double ydiff = y5[i] - y[i], bspl = h * k1[i] - ydiff;
        d.r[0][i] = y[i];
        d.r[1][i] = ydiff;
        d.r[2][i] = bspl;
        d.r[3][i] = ydiff - h * k7[i] - bspl;
        d.r[4][i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
      }
      const double tn = (t1 - (t + h) <= hmin) ? t1 : t + h;
      while (next_out < out.size() && out[next_out] < tn) {
        sol.t.push_back(out[next_out]);
        sol.y.push_back(d(out[next_out]));
        ++next_out;
      }
      if (opt.record_steps && tn < t1 && (next_out >= out.size() || out[next_out] != tn)) {
        sol.t.push_back(tn);
        sol.y.push_back(y5);
      }
      if (next_out < out.size() && out[next_out] == tn) {
        sol.t.push_back(tn);
        sol.y.push_back(y5);
        ++next_out;
      }
      ++sol.accepted;
      double fac = std::pow(err, expo1) / std::pow(facold, beta);
      fac = std::clamp(fac / safe, facc2, facc1);
      facold = std::max(err, 1e-4);
      t = tn;
      y = y5;
      k1 = k7;
      double hnew = h / fac;
      if (last_rejected) hnew = std::min(hnew, h);
      last_rejected = false;
      h = hnew;
    } else {
      ++sol.rejected;
      last_rejected = true;
      const double fac = std::isfinite(err) ? std::min(facc1, std::pow(err, expo1) / safe) : facc1;
      h = h / fac;
    }
  }
  return sol;
}

}  // namespace igsoft
