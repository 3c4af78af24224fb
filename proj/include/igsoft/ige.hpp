#pragma once

// Information Geometric Entropy.
//
//   vol(tau')     = integral of the Fisher density sqrt(det g) over the box spanned
//                   by theta(0) and theta(tau') coordinate-wise
//   avg_vol(tau)  = (1/tau) * integral_0^tau vol(tau') dtau'
//   S(tau)        = log avg_vol(tau)
//
// The asymptotic growth rate of S is read off by a least-squares fit on a tail window.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "geodesic.hpp"
#include "quadrature.hpp"
#include "regression.hpp"

namespace igsoft {

/// sqrt(det g) from the closed form of the model.
template <class Model>
double fisher_density(const Vec<Model::dim>& theta)
{
  return Model::fisher_density(theta);
}

template <std::size_t N>
struct GeodesicBox
{
  Vec<N> lo{};
  Vec<N> hi{};

  static GeodesicBox spanning(const Vec<N>& a, const Vec<N>& b)
  {
    GeodesicBox box;
    for (std::size_t k = 0; k < N; ++k) {
      box.lo[k] = std::min(a[k], b[k]);
      box.hi[k] = std::max(a[k], b[k]);
    }
    return box;
  }
};

struct VolumeValue
{
  double value = 0.0;
  /// A sigma bound fell below the positivity floor and was clamped.
  bool clamped = false;
};

namespace detail {

inline double inv_sigma(double log_sigma, bool& clamped)
{
  static const double log_floor = std::log(kSigmaFloor);
  if (log_sigma < log_floor) {
    clamped = true;
    log_sigma = log_floor;
  }
  return std::exp(-log_sigma);
}

}  // namespace detail

/// Factorised closed form: |d mu| * |1/sx(t') - 1/sx(0)| * 2 |log sy(t') - log sy(0)|.
inline VolumeValue box_volume(const GeodesicPoint3D& start, const GeodesicPoint3D& end)
{
  VolumeValue v;
  const double dmu = std::abs(end.theta[0] - start.theta[0]);
  const double dinv =
      std::abs(detail::inv_sigma(end.log_sigma[1], v.clamped) - detail::inv_sigma(start.log_sigma[1], v.clamped));
  const double dlog = 2.0 * std::abs(end.log_sigma[2] - start.log_sigma[2]);
  v.value = dmu * dinv * dlog;
  return v;
}

/// Factorised closed form: |d mu| * 2 |1/s(t') - 1/s(0)|.
inline VolumeValue box_volume(const GeodesicPoint2D& start, const GeodesicPoint2D& end)
{
  VolumeValue v;
  const double dmu = std::abs(end.theta[0] - start.theta[0]);
  const double dinv =
      std::abs(detail::inv_sigma(end.log_sigma[1], v.clamped) - detail::inv_sigma(start.log_sigma[1], v.clamped));
  v.value = dmu * 2.0 * dinv;
  return v;
}

template <std::size_t N>
VolumeValue box_volume(const PathFunction<N>& path, double tau_prime)
{
  if (!(tau_prime >= 0.0)) throw DomainError("box_volume: tau' must be >= 0");
  return box_volume(path(0.0), path(tau_prime));
}

/// Product Gauss-Legendre integral of the Fisher density over the box, in
/// (mu, log sigma) coordinates. Independent of the factorised antiderivatives.
template <class Model>
double box_volume_quadrature(const GeodesicPoint<Model::dim>& start, const GeodesicPoint<Model::dim>& end,
                             std::size_t nodes = 48)
{
  constexpr std::size_t N = Model::dim;
  std::array<QuadratureRule, N> rules;
  for (std::size_t k = 0; k < N; ++k) {
    const double a = Model::positive[k] ? std::min(start.log_sigma[k], end.log_sigma[k])
                                        : std::min(start.theta[k], end.theta[k]);
    const double b = Model::positive[k] ? std::max(start.log_sigma[k], end.log_sigma[k])
                                        : std::max(start.theta[k], end.theta[k]);
    rules[k] = gauss_legendre(nodes, a, b);
  }
  std::vector<double> terms;
  std::array<std::size_t, N> idx{};
  while (true) {
    Vec<N> theta;
    double w = 1.0;
    for (std::size_t k = 0; k < N; ++k) {
      const double u = rules[k].nodes[idx[k]];
      w *= rules[k].weights[idx[k]];
      if (Model::positive[k]) {
        theta[k] = std::exp(u);
        w *= theta[k];  // d sigma = sigma d(log sigma)
      } else {
        theta[k] = u;
      }
    }
    terms.push_back(w * Model::fisher_density(theta));
    std::size_t k = 0;
    while (k < N && ++idx[k] == nodes) idx[k++] = 0;
    if (k == N) break;
  }
  return pairwise_sum(terms);
}

struct AveragedVolume
{
  double value = 0.0;
  /// |avg(n) - avg(n/2)| / avg(n): half-interval refinement estimate.
  double refinement_change = 0.0;
  bool clamped = false;
};

/// (1/tau) integral_0^tau vol(tau') dtau' by composite Simpson on n_grid intervals.
template <std::size_t N>
AveragedVolume averaged_volume(const PathFunction<N>& path, double tau, std::size_t n_grid = 4096)
{
  if (!(tau > 0.0)) throw DomainError("averaged_volume: tau must be > 0");
  if (n_grid < 64) throw DomainError("averaged_volume: n_grid must be >= 64");
  if (n_grid % 4) n_grid += 4 - n_grid % 4;
  const auto start = path(0.0);
  const double h = tau / double(n_grid);
  std::vector<double> vol(n_grid + 1);
  AveragedVolume out;
  for (std::size_t i = 0; i <= n_grid; ++i) {
    const auto v = box_volume(start, path(h * double(i)));
    vol[i] = v.value;
    out.clamped = out.clamped || v.clamped;
  }
  auto simpson = [&](std::size_t stride) {
    const std::size_t n = n_grid / stride;
    std::vector<double> t(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
      const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
      t[i] = w * vol[i * stride];
    }
    return pairwise_sum(t) * (h * double(stride)) / 3.0 / tau;
  };
  out.value = simpson(1);
  const double coarse = simpson(2);
  out.refinement_change = std::abs(out.value - coarse) / std::abs(out.value);
  return out;
}

/// Closed-form averaged volume of the 3D model along the reference mean path.
inline double closed_form_volume_3d(const GeodesicSpec3D& s, double tau)
{
  if (!(tau > 0.0)) throw DomainError("closed_form_volume_3d: tau must be > 0");
  const double s0 = s.sigma0(), mu0 = s.mu0(), lp = s.lambda_plus_prime(), lf = s.lambda_f();
  const double ln_sp = std::log(s.sigma0_prime());
  const double k = s0 * lp, decay = std::exp(-2.0 * k * tau);
  const double bracket = (2.0 * s0 + mu0) * s0 * lf * lp * tau + (2.0 * s0 - mu0) * s0 * lf * lp * tau * decay -
                         (lf + lp * s0 * ln_sp) * (2.0 * s0 + mu0) - (s0 * lp * ln_sp - lf) * (2.0 * s0 - mu0) * decay;
  return std::exp(k * tau) / (s0 * s0 * s0 * lp * lp * tau) * bracket;
}

inline double closed_form_volume_2d(const GeodesicSpec2D& s, double tau)
{
  if (!(tau > 0.0)) throw DomainError("closed_form_volume_2d: tau must be > 0");
  const double s0 = s.sigma0(), mu0 = s.mu0(), l = s.lambda_plus(), k = s0 * l;
  return ((mu0 + 2.0 * s0) + (2.0 * s0 - mu0) * std::exp(-2.0 * k * tau)) * std::exp(k * tau) / (l * s0 * s0 * tau);
}

/// Leading asymptotic forms.
inline double closed_form_volume_3d_asymptotic(const GeodesicSpec3D& s, double tau)
{
  return s.lambda_f() / s.lambda_plus_prime() * (s.mu0() + 2.0 * s.sigma0()) / (s.sigma0() * s.sigma0()) *
         std::exp(s.rate() * tau);
}

inline double closed_form_volume_2d_asymptotic(const GeodesicSpec2D& s, double tau)
{
  return (s.mu0() + 2.0 * s.sigma0()) / (s.sigma0() * s.sigma0() * s.lambda_plus()) * std::exp(s.rate() * tau) / tau;
}

struct IgeOptions
{
  /// Fit window in units of sigma0 * lambda * tau.
  double window_lo = 200.0;
  double window_hi = 500.0;
  std::size_t fit_points = 61;
  std::size_t n_grid = 4096;
  /// Samples of the exported series on (0, window_hi / rate].
  std::size_t series_points = 101;
  MeanPathForm form = MeanPathForm::geodesic;
};

struct IgeResult
{
  std::string model;
  double rate = 0.0;
  std::vector<double> tau;
  std::vector<double> vol;
  std::vector<double> avg_vol;
  std::vector<double> entropy;
  std::vector<double> entropy_closed_form;
  LinearFit fit;
  double window_tau_lo = 0.0;
  double window_tau_hi = 0.0;
  bool clamped = false;
};

namespace detail {

template <std::size_t N, class ClosedVolume>
IgeResult ige_impl(const char* model, const PathFunction<N>& path, double rate, ClosedVolume&& closed,
                   const IgeOptions& o)
{
  if (!(o.window_hi > o.window_lo && o.window_lo > 0.0)) throw DomainError("ige: invalid fit window");
  if (o.fit_points < 3) throw DomainError("ige: need >= 3 fit points");
  IgeResult r;
  r.model = model;
  r.rate = rate;
  r.window_tau_lo = o.window_lo / rate;
  r.window_tau_hi = o.window_hi / rate;
  const auto start = path(0.0);
  for (std::size_t i = 1; i <= o.series_points; ++i) {
    const double tau = r.window_tau_hi * double(i) / double(o.series_points);
    const auto v = box_volume(start, path(tau));
    const auto a = averaged_volume(path, tau, o.n_grid);
    r.tau.push_back(tau);
    r.vol.push_back(v.value);
    r.avg_vol.push_back(a.value);
    r.entropy.push_back(std::log(a.value));
    r.entropy_closed_form.push_back(std::log(closed(tau)));
    r.clamped = r.clamped || v.clamped || a.clamped;
  }
  std::vector<double> ft, fs;
  for (double tau : uniform_grid(r.window_tau_lo, r.window_tau_hi, o.fit_points)) {
    const auto a = averaged_volume(path, tau, o.n_grid);
    ft.push_back(tau);
    fs.push_back(std::log(a.value));
    r.clamped = r.clamped || a.clamped;
  }
  for (double s : fs)
    if (!std::isfinite(s)) throw DomainError(std::string("ige: non-finite entropy in fit window (") + model + ")");
  r.fit = fit_line(ft, fs);
  return r;
}

}  // namespace detail

inline IgeResult ige(const GeodesicSpec3D& s, const IgeOptions& o = {})
{
  return detail::ige_impl<3>("3D", closed_form_path(s, o.form), s.rate(),
                             [&](double t) { return closed_form_volume_3d(s, t); }, o);
}

inline IgeResult ige(const GeodesicSpec2D& s, const IgeOptions& o = {})
{
  return detail::ige_impl<2>("2D", closed_form_path(s), s.rate(), [&](double t) { return closed_form_volume_2d(s, t); },
                             o);
}

struct IgeSoftening
{
  IgeResult ige3d;
  IgeResult ige2d;
  /// slope(S_2D) / slope(S_3D); 1/sqrt(2) asymptotically.
  double ratio = 0.0;
};

/// Builds the coupled 2D spec (lambda_+ = lambda_+'/sqrt 2) and compares fitted tail slopes.
inline IgeSoftening softening_ratio_ige(const GeodesicSpec3D& s, const IgeOptions& o = {})
{
  IgeSoftening r{ige(s, o), ige(GeodesicSpec2D::coupled_to(s), o), 0.0};
  r.ratio = r.ige2d.fit.slope / r.ige3d.fit.slope;
  return r;
}

/// Largest |avg_vol / V_closed - 1| over `points` samples of the window
/// sigma0 lambda tau in [lo, hi].
template <std::size_t N, class ClosedVolume>
double max_relative_volume_gap(const PathFunction<N>& path, double rate, ClosedVolume&& closed, double lo, double hi,
                               std::size_t points = 31, std::size_t n_grid = 4096)
{
  double worst = 0.0;
  for (double tau : uniform_grid(lo / rate, hi / rate, points))
    worst = std::max(worst, std::abs(averaged_volume(path, tau, n_grid).value / closed(tau) - 1.0));
  return worst;
}

}  // namespace igsoft
