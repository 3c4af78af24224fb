#pragma once

// Jacobi-Levi-Civita geodesic deviation
//   D^2 J^k / Dtau^2 + R^k_{nml} u^n J^m u^l = 0,   u = dtheta/dtau,
// with the covariant second derivative expanded as
//   D^2J^k = J''^k + 2 G^k_ab J'^a u^b + G^k_ab J^a theta''^b
//          + d_n G^k_ab u^n u^b J^a + G^k_ab G^a_rs u^s u^b J^r.
// All coefficients come from the analytic Christoffels, their gradient and the
// analytic Riemann tensor of the model.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "geodesic.hpp"
#include "regression.hpp"

namespace igsoft {

template <std::size_t N>
struct JacobiState
{
  Vec<N> J{};
  Vec<N> dJ{};
};

/// J(0) = (1, ..., 1)/sqrt(n), J'(0) = 0.
template <std::size_t N>
JacobiState<N> default_jacobi_initial()
{
  JacobiState<N> s;
  s.J.fill(1.0 / std::sqrt(double(N)));
  return s;
}

/// d^2 J / dtau^2 along the geodesic state (theta, u).
template <class Model>
Vec<Model::dim> jlc_rhs_full(const Vec<Model::dim>& theta, const Vec<Model::dim>& u, const JacobiState<Model::dim>& js)
{
  constexpr std::size_t N = Model::dim;
  const Vec<N> acc = geodesic_rhs<Model>(theta, u);  // validates the domain
  const auto G = Model::christoffel(theta);
  const auto dG = Model::christoffel_gradient(theta);
  const auto R = Model::riemann(theta);
  const auto& J = js.J;
  const auto& dJ = js.dJ;
  Vec<N> out{};
  for (std::size_t k = 0; k < N; ++k) {
    double s = 0.0;
    for (std::size_t a = 0; a < N; ++a)
      for (std::size_t b = 0; b < N; ++b) {
        s += 2.0 * G(k, a, b) * dJ[a] * u[b];
        s += G(k, a, b) * J[a] * acc[b];
        for (std::size_t n = 0; n < N; ++n) s += dG(k, a, b, n) * u[n] * u[b] * J[a];
        for (std::size_t r = 0; r < N; ++r)
          for (std::size_t q = 0; q < N; ++q) s += G(k, a, b) * G(a, r, q) * u[q] * u[b] * J[r];
      }
    for (std::size_t n = 0; n < N; ++n)
      for (std::size_t m = 0; m < N; ++m)
        for (std::size_t l = 0; l < N; ++l) s += R(k, n, m, l) * u[n] * J[m] * u[l];
    out[k] = -s;
  }
  return out;
}

/// The JLC system written as J'' + D J' + K J = 0; D and K at one geodesic state.
template <std::size_t N>
struct JlcCoefficients
{
  Matrix<N> damping;    // coefficient of dJ^j in equation k: damping(k, j)
  Matrix<N> stiffness;  // coefficient of J^j in equation k
};

template <class Model>
JlcCoefficients<Model::dim> jlc_coefficients(const Vec<Model::dim>& theta, const Vec<Model::dim>& u)
{
  constexpr std::size_t N = Model::dim;
  JlcCoefficients<N> c;
  for (std::size_t j = 0; j < N; ++j) {
    JacobiState<N> e;
    e.dJ[j] = 1.0;
    const auto d = jlc_rhs_full<Model>(theta, u, e);
    JacobiState<N> f;
    f.J[j] = 1.0;
    const auto s = jlc_rhs_full<Model>(theta, u, f);
    for (std::size_t k = 0; k < N; ++k) {
      c.damping(k, j) = -d[k];
      c.stiffness(k, j) = -s[k];
    }
  }
  return c;
}

/// sqrt(g_lm J^l J^m) written out for the diagonal metrics:
/// 3D: [ (J1)^2/sx^2 + 2 (J2)^2/sx^2 + 2 (J3)^2/sy^2 ]^(1/2);  2D: [ (J1)^2/s^2 + 4 (J2)^2/s^2 ]^(1/2).
inline double intensity(const Vec<3>& theta, const Vec<3>& J)
{
  const double sx2 = theta[1] * theta[1], sy2 = theta[2] * theta[2];
  return std::sqrt(J[0] * J[0] / sx2 + 2.0 * J[1] * J[1] / sx2 + 2.0 * J[2] * J[2] / sy2);
}

inline double intensity(const Vec<2>& theta, const Vec<2>& J)
{
  const double s2 = theta[1] * theta[1];
  return std::sqrt(J[0] * J[0] / s2 + 4.0 * J[1] * J[1] / s2);
}

template <std::size_t N>
struct JacobiTrajectory
{
  std::vector<double> tau;
  std::vector<Vec<N>> theta;
  std::vector<Vec<N>> velocity;
  std::vector<Vec<N>> J;
  std::vector<Vec<N>> dJ;
  std::vector<double> intensity;
  bool truncated = false;
  std::string truncation_reason;

  std::size_t size() const { return tau.size(); }
};

/// Overflow threshold on |J|.
inline constexpr double kJacobiOverflow = 1e300;

/// Co-integrates the geodesic and the JLC system (first-order dimension 4n).
template <class Model>
JacobiTrajectory<Model::dim> integrate_jlc_from(const GeodesicPoint<Model::dim>& start,
                                                const JacobiState<Model::dim>& initial, double tau_max, double tol,
                                                std::span<const double> grid = {})
{
  constexpr std::size_t N = Model::dim;
  detail::check_tolerance(tol);
  for (std::size_t i = 0; i < N; ++i)
    if (!std::isfinite(initial.J[i]) || !std::isfinite(initial.dJ[i]))
      throw DomainError("integrate_jlc: initial Jacobi state must be finite");
  using State = Vec<4 * N>;
  State y0;
  for (std::size_t i = 0; i < N; ++i) {
    y0[i] = start.theta[i];
    y0[N + i] = start.velocity[i];
    y0[2 * N + i] = initial.J[i];
    y0[3 * N + i] = initial.dJ[i];
  }
  auto unpack = [](const State& y, Vec<N>& th, Vec<N>& u, JacobiState<N>& js) {
    for (std::size_t i = 0; i < N; ++i) {
      th[i] = y[i];
      u[i] = y[N + i];
      js.J[i] = y[2 * N + i];
      js.dJ[i] = y[3 * N + i];
    }
  };
  auto rhs = [&](double, const State& y) {
    Vec<N> th, u;
    JacobiState<N> js;
    unpack(y, th, u, js);
    const Vec<N> acc = geodesic_rhs<Model>(th, u);
    const Vec<N> jacc = jlc_rhs_full<Model>(th, u, js);
    State d;
    for (std::size_t i = 0; i < N; ++i) {
      d[i] = u[i];
      d[N + i] = acc[i];
      d[2 * N + i] = js.dJ[i];
      d[3 * N + i] = jacc[i];
    }
    return d;
  };
  auto guard = [&](double, const State& y) {
    Vec<N> th, u;
    JacobiState<N> js;
    unpack(y, th, u, js);
    if (auto why = detail::positivity_guard<Model>(th); !why.empty()) return why;
    for (std::size_t i = 0; i < N; ++i)
      if (!(std::abs(js.J[i]) <= kJacobiOverflow)) return std::string("Jacobi field overflow (|J| > 1e300)");
    return std::string{};
  };
  OdeOptions opt;
  opt.rtol = tol;
  // The J^1 column of the stiffness vanishes only after cancellation, so every row
  // carries rounding noise of order eps * |J|; decaying components get an absolute floor there.
  double jscale = 0.0;
  for (std::size_t i = 0; i < N; ++i) jscale = std::max({jscale, std::abs(initial.J[i]), std::abs(initial.dJ[i])});
  opt.atol_components.assign(4 * N, 0.0);
  for (std::size_t i = 2 * N; i < 4 * N; ++i) opt.atol_components[i] = tol * 1e-6 * std::max(jscale, 1e-300);
  const auto sol = integrate_dopri5<4 * N>(rhs, start.tau, y0, tau_max, opt, grid, guard);

  JacobiTrajectory<N> tr;
  tr.truncated = sol.aborted;
  tr.truncation_reason = sol.abort_reason;
  for (std::size_t j = 0; j < sol.t.size(); ++j) {
    Vec<N> th, u;
    JacobiState<N> js;
    unpack(sol.y[j], th, u, js);
    tr.tau.push_back(sol.t[j]);
    tr.theta.push_back(th);
    tr.velocity.push_back(u);
    tr.J.push_back(js.J);
    tr.dJ.push_back(js.dJ);
    tr.intensity.push_back(intensity(th, js.J));
  }
  return tr;
}

inline JacobiTrajectory<3> integrate_jlc(const GeodesicSpec3D& s, const JacobiState<3>& initial, double tau_max,
                                         double tol, std::span<const double> grid = {})
{
  return integrate_jlc_from<Gaussian3D>(closed_form_3d(s, 0.0), initial, tau_max, tol, grid);
}

inline JacobiTrajectory<2> integrate_jlc(const GeodesicSpec2D& s, const JacobiState<2>& initial, double tau_max,
                                         double tol, std::span<const double> grid = {})
{
  return integrate_jlc_from<Gaussian2D>(closed_form_2d(s, 0.0), initial, tau_max, tol, grid);
}

/// Integration constants of the asymptotic solutions
///   J1 = C1_1 + C1_2 exp(-2 L tau)
///   J2 = (C2_1 + C2_2 tau) exp(-L tau)
///   J3 = (C3_1 + C3_2 tau) exp(-lambda_f tau)     (3D only)
/// with L = sigma0 * lambda (lambda_+' in 3D, lambda_+ in 2D).
struct JacobiConstants
{
  std::size_t dim = 3;
  double Lambda = 0.0;
  double lambda_f = 0.0;
  std::array<std::array<double, 2>, 3> C{};
};

/// Lambda_3D = sigma0 lambda_+' and Lambda_2D = sigma0 lambda_+ for one coupled pair.
struct CoupledLambdas
{
  double Lambda3D = 0.0;
  double Lambda2D = 0.0;

  explicit CoupledLambdas(const GeodesicSpec3D& s)
      : Lambda3D(s.rate()), Lambda2D(GeodesicSpec2D::coupled_to(s).rate())
  {
    if (!(Lambda3D > Lambda2D && Lambda2D > 0.0)) throw DomainError("coupled Lambdas must satisfy L3D > L2D > 0");
  }

  double gap() const { return Lambda3D - Lambda2D; }
};

/// Evaluates the asymptotic solutions and their tau-derivatives.
inline JacobiState<3> asymptotic_jlc_solutions(const JacobiConstants& c, double tau)
{
  JacobiState<3> s;
  const double L = c.Lambda, e2 = std::exp(-2.0 * L * tau), e1 = std::exp(-L * tau);
  s.J[0] = c.C[0][0] + c.C[0][1] * e2;
  s.dJ[0] = -2.0 * L * c.C[0][1] * e2;
  s.J[1] = (c.C[1][0] + c.C[1][1] * tau) * e1;
  s.dJ[1] = (c.C[1][1] - L * (c.C[1][0] + c.C[1][1] * tau)) * e1;
  if (c.dim == 3) {
    const double lf = c.lambda_f, ef = std::exp(-lf * tau);
    s.J[2] = (c.C[2][0] + c.C[2][1] * tau) * ef;
    s.dJ[2] = (c.C[2][1] - lf * (c.C[2][0] + c.C[2][1] * tau)) * ef;
  }
  return s;
}

struct ExponentFit
{
  double exponent = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double window_lo = 0.0;
  double window_hi = 0.0;
};

/// Least-squares slope of log intensity against tau on [lo, hi].
template <std::size_t N>
ExponentFit exponent_fit(const JacobiTrajectory<N>& tr, double lo, double hi)
{
  std::vector<double> t, li;
  for (std::size_t j = 0; j < tr.size(); ++j) {
    if (tr.tau[j] < lo || tr.tau[j] > hi) continue;
    if (!(tr.intensity[j] > 0.0)) throw DomainError("exponent_fit: non-positive intensity in fit window");
    t.push_back(tr.tau[j]);
    li.push_back(std::log(tr.intensity[j]));
  }
  if (t.size() < 3) throw DomainError("exponent_fit: fewer than 3 samples in fit window");
  const LinearFit f = fit_line(t, li);
  return {f.slope, f.intercept, f.r_squared, lo, hi};
}

/// Regresses the numeric tail on the asymptotic basis functions. J2 and J3 are
/// fitted as J e^{rate tau} = C1 + C2 tau (well conditioned on late windows).
template <std::size_t N>
JacobiConstants extract_constants(const JacobiTrajectory<N>& tr, double Lambda, double lambda_f, double lo, double hi)
{
  JacobiConstants c;
  c.dim = N;
  c.Lambda = Lambda;
  c.lambda_f = lambda_f;
  std::vector<double> t, one, decay, j1;
  std::array<std::vector<double>, 3> scaled;
  for (std::size_t j = 0; j < tr.size(); ++j) {
    const double tau = tr.tau[j];
    if (tau < lo || tau > hi) continue;
    t.push_back(tau);
    one.push_back(1.0);
    decay.push_back(std::exp(-2.0 * Lambda * tau));
    j1.push_back(tr.J[j][0]);
    scaled[1].push_back(tr.J[j][1] * std::exp(Lambda * tau));
    if constexpr (N == 3) scaled[2].push_back(tr.J[j][2] * std::exp(lambda_f * tau));
  }
  if (t.size() < 3) throw DomainError("extract_constants: fewer than 3 samples in window");
  c.C[0] = fit_two_basis(one, decay, j1);
  const LinearFit f2 = fit_line(t, scaled[1]);
  c.C[1] = {f2.intercept, f2.slope};
  if constexpr (N == 3) {
    const LinearFit f3 = fit_line(t, scaled[2]);
    c.C[2] = {f3.intercept, f3.slope};
  }
  return c;
}

struct JacobiOptions
{
  /// Fit window in units of sigma0 * lambda * tau; integration runs to window_hi.
  double window_lo = 20.0;
  double window_hi = 50.0;
  std::size_t samples = 501;
  double tol = 1e-10;
};

struct JacobiRun3D
{
  JacobiTrajectory<3> trajectory;
  ExponentFit fit;
};

struct JacobiRun2D
{
  JacobiTrajectory<2> trajectory;
  ExponentFit fit;
};

inline JacobiRun3D run_jacobi(const GeodesicSpec3D& s, const JacobiState<3>& init, const JacobiOptions& o = {})
{
  const double hi = o.window_hi / s.rate(), lo = o.window_lo / s.rate();
  const auto grid = uniform_grid(0.0, hi, o.samples);
  JacobiRun3D r{integrate_jlc(s, init, hi, o.tol, grid), {}};
  r.fit = exponent_fit(r.trajectory, lo, hi);
  return r;
}

inline JacobiRun2D run_jacobi(const GeodesicSpec2D& s, const JacobiState<2>& init, const JacobiOptions& o = {})
{
  const double hi = o.window_hi / s.rate(), lo = o.window_lo / s.rate();
  const auto grid = uniform_grid(0.0, hi, o.samples);
  JacobiRun2D r{integrate_jlc(s, init, hi, o.tol, grid), {}};
  r.fit = exponent_fit(r.trajectory, lo, hi);
  return r;
}

struct JacobiSoftening
{
  JacobiRun3D run3d;
  JacobiRun2D run2d;
  double gap = 0.0;
  /// sigma0 lambda_+' (1 - 1/sqrt 2)
  double expected_gap = 0.0;
};

/// Fitted growth exponents of the coupled 3D/2D pair and their difference.
inline JacobiSoftening softening_gap(const GeodesicSpec3D& s, const JacobiState<3>& init3 = default_jacobi_initial<3>(),
                                     const JacobiState<2>& init2 = default_jacobi_initial<2>(),
                                     const JacobiOptions& o = {})
{
  JacobiSoftening r{run_jacobi(s, init3, o), run_jacobi(GeodesicSpec2D::coupled_to(s), init2, o), 0.0, 0.0};
  r.gap = r.run3d.fit.exponent - r.run2d.fit.exponent;
  r.expected_gap = CoupledLambdas(s).gap();
  return r;
}

}  // namespace igsoft
