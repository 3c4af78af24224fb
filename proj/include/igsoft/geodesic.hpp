#pragma once

// Geodesic flow on the two Gaussian manifolds: the closed-form family of
// logistic paths and a numerical integrator of
//   d^2 theta^k / dtau^2 + Gamma^k_lm dtheta^l/dtau dtheta^m/dtau = 0.

#include <cmath>
#include <functional>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "models.hpp"
#include "ode.hpp"

namespace igsoft {

/// Positivity floor below which integration halts.
inline constexpr double kSigmaFloor = 1e-300;

class GeodesicSpec3D
{
 public:
  GeodesicSpec3D(double mu0, double sigma0, double sigma0_prime, double lambda_plus_prime, double lambda_f)
      : mu0_(detail::require_finite(mu0, "mu0")),
        sigma0_(detail::require_positive(sigma0, "sigma0")),
        sigma0_prime_(detail::require_positive(sigma0_prime, "sigma0'")),
        lambda_plus_prime_(detail::require_positive(lambda_plus_prime, "lambda_+'")),
        lambda_f_(detail::require_positive(lambda_f, "lambda_f"))
  {
  }

  /// lambda_f = log(sigma0' / epsilon) / tau_f, where epsilon = sigma_y(tau_f).
  static GeodesicSpec3D from_horizon(double mu0, double sigma0, double sigma0_prime, double lambda_plus_prime,
                                     double tau_f, double epsilon)
  {
    detail::require_positive(tau_f, "tau_f");
    detail::require_positive(epsilon, "epsilon");
    if (!(epsilon < sigma0_prime)) throw DomainError("epsilon must be smaller than sigma0'");
    return GeodesicSpec3D(mu0, sigma0, sigma0_prime, lambda_plus_prime, std::log(sigma0_prime / epsilon) / tau_f);
  }

  double mu0() const { return mu0_; }
  double sigma0() const { return sigma0_; }
  double sigma0_prime() const { return sigma0_prime_; }
  double lambda_plus_prime() const { return lambda_plus_prime_; }
  double lambda_f() const { return lambda_f_; }
  /// sigma0 * lambda_+', the logistic rate of the (mu_x, sigma_x) block.
  double rate() const { return sigma0_ * lambda_plus_prime_; }

 private:
  double mu0_, sigma0_, sigma0_prime_, lambda_plus_prime_, lambda_f_;
};

class GeodesicSpec2D
{
 public:
  GeodesicSpec2D(double mu0, double sigma0, double lambda_plus)
      : mu0_(detail::require_finite(mu0, "mu0")),
        sigma0_(detail::require_positive(sigma0, "sigma0")),
        lambda_plus_(detail::require_positive(lambda_plus, "lambda_+"))
  {
  }

  /// The constrained model's rate: lambda_+ = lambda_+' / sqrt(2), same mu0 and sigma0.
  static GeodesicSpec2D coupled_to(const GeodesicSpec3D& s)
  {
    return GeodesicSpec2D(s.mu0(), s.sigma0(), s.lambda_plus_prime() / std::numbers::sqrt2);
  }

  double mu0() const { return mu0_; }
  double sigma0() const { return sigma0_; }
  double lambda_plus() const { return lambda_plus_; }
  double rate() const { return sigma0_ * lambda_plus_; }

 private:
  double mu0_, sigma0_, lambda_plus_;
};

/// Which mean path to use for the 3D model.
///
/// `geodesic` solves the geodesic equations exactly: mu_x = mu0 + sqrt(2) sigma0 tanh(k tau),
/// from the first integral mu_x' = A1 sigma_x^2 with A1 = sqrt(2 a).
/// `reference` has amplitude 2 sigma0 (A1 = sqrt(4 a)). The closed-form IGE volume is built
/// on it, but it does not satisfy the sigma_x equation.
/// Both coincide in sigma_x and sigma_y. The 2D model has a single (exact) form.
enum class MeanPathForm { geodesic, reference };

template <std::size_t N>
struct GeodesicPoint
{
  double tau = 0.0;
  Vec<N> theta{};
  Vec<N> velocity{};
  /// log of the positive coordinates (0 for mu_x); exact even where sigma underflows.
  Vec<N> log_sigma{};
};

using GeodesicPoint3D = GeodesicPoint<3>;
using GeodesicPoint2D = GeodesicPoint<2>;

template <std::size_t N>
using PathFunction = std::function<GeodesicPoint<N>(double)>;

namespace detail {

/// sech(x) without overflow.
inline double sech(double x)
{
  const double e = std::exp(-std::abs(x));
  return 2.0 * e / (1.0 + e * e);
}

inline double log_cosh(double x)
{
  const double a = std::abs(x);
  return a + std::log1p(std::exp(-2.0 * a)) - std::numbers::ln2;
}

/// mu = mu0 + amp tanh(k tau), sigma = sigma0 sech(k tau) and their tau-derivatives.
inline void logistic_block(double mu0, double sigma0, double k, double amp, double tau, double& mu, double& dmu,
                           double& sigma, double& dsigma, double& log_sigma)
{
  const double th = std::tanh(k * tau), sh = sech(k * tau);
  mu = mu0 + amp * th;
  dmu = amp * k * sh * sh;
  sigma = sigma0 * sh;
  dsigma = -k * sigma0 * sh * th;
  log_sigma = std::log(sigma0) - log_cosh(k * tau);
}

}  // namespace detail

inline GeodesicPoint3D closed_form_3d(const GeodesicSpec3D& s, double tau, MeanPathForm form = MeanPathForm::geodesic)
{
  GeodesicPoint3D p;
  p.tau = tau;
  const double amp = (form == MeanPathForm::geodesic ? std::numbers::sqrt2 : 2.0) * s.sigma0();
  detail::logistic_block(s.mu0(), s.sigma0(), s.rate(), amp, tau, p.theta[0], p.velocity[0], p.theta[1],
                         p.velocity[1], p.log_sigma[1]);
  p.log_sigma[2] = std::log(s.sigma0_prime()) - s.lambda_f() * tau;
  p.theta[2] = std::exp(p.log_sigma[2]);
  p.velocity[2] = -s.lambda_f() * p.theta[2];
  return p;
}

inline GeodesicPoint2D closed_form_2d(const GeodesicSpec2D& s, double tau)
{
  GeodesicPoint2D p;
  p.tau = tau;
  detail::logistic_block(s.mu0(), s.sigma0(), s.rate(), 2.0 * s.sigma0(), tau, p.theta[0], p.velocity[0],
                         p.theta[1], p.velocity[1], p.log_sigma[1]);
  return p;
}

inline PathFunction<3> closed_form_path(const GeodesicSpec3D& s, MeanPathForm form = MeanPathForm::geodesic)
{
  return [s, form](double tau) { return closed_form_3d(s, tau, form); };
}

inline PathFunction<2> closed_form_path(const GeodesicSpec2D& s)
{
  return [s](double tau) { return closed_form_2d(s, tau); };
}

/// Integration constants of the logistic family.
/// a is the separation constant (a = A1^2/2 in 3D, A1^2/4 in 2D), lambda = sqrt(a),
/// and (c1, c2, c3, c4) = (sigma0, a, 0, mu0 + 2 sigma0) for the c3 = 0 family.
struct DerivedConstants
{
  double a = 0.0;
  double A1 = 0.0;
  double c1 = 0.0, c2 = 0.0, c3 = 0.0, c4 = 0.0;
};

inline DerivedConstants derived_constants(const GeodesicSpec3D& s)
{
  const double a = s.lambda_plus_prime() * s.lambda_plus_prime();
  return {a, std::sqrt(2.0 * a), s.sigma0(), a, 0.0, s.mu0() + 2.0 * s.sigma0()};
}

inline DerivedConstants derived_constants(const GeodesicSpec2D& s)
{
  const double a = s.lambda_plus() * s.lambda_plus();
  return {a, std::sqrt(4.0 * a), s.sigma0(), a, 0.0, s.mu0() + 2.0 * s.sigma0()};
}

/// General logistic family with arbitrary c3, written exactly as
///   mu_x = (c4 (1 + E) - 4 c1) / (1 + E),  sigma_x = 2 c1 sqrt(E) / (1 + E),
///   E = exp(2 c1 sqrt(c2) (tau + c3)).
/// Returns (mu_x, sigma_x). Carries the amplitude 2 c1, i.e. the reference mean path.
inline std::array<double, 2> logistic_family(const DerivedConstants& c, double tau)
{
  const double x = c.c1 * std::sqrt(c.c2) * (tau + c.c3);
  const double E = std::exp(2.0 * x);
  return {(c.c4 * (1.0 + E) - 4.0 * c.c1) / (1.0 + E), 2.0 * c.c1 * std::exp(x) / (1.0 + E)};
}

/// Second derivatives -Gamma^k_lm v^l v^m from the analytic Christoffels.
template <class Model>
Vec<Model::dim> geodesic_rhs(const Vec<Model::dim>& theta, const Vec<Model::dim>& v)
{
  constexpr std::size_t N = Model::dim;
  for (std::size_t k = 0; k < N; ++k)
    if (Model::positive[k] && !(theta[k] > 0.0))
      throw DomainError(std::string("geodesic_rhs: ") + Model::name + " coordinate " + std::to_string(k) +
                        " left the domain (sigma <= 0)");
  const auto G = Model::christoffel(theta);
  Vec<N> a{};
  for (std::size_t k = 0; k < N; ++k) {
    double s = 0.0;
    for (std::size_t l = 0; l < N; ++l)
      for (std::size_t m = 0; m < N; ++m) s += G(k, l, m) * v[l] * v[m];
    a[k] = -s;
  }
  return a;
}

/// g_lm v^l v^m, constant along a geodesic.
template <class Model>
double fisher_speed(const Vec<Model::dim>& theta, const Vec<Model::dim>& v)
{
  const auto g = Model::metric(theta);
  double s = 0.0;
  for (std::size_t l = 0; l < Model::dim; ++l)
    for (std::size_t m = 0; m < Model::dim; ++m) s += g(l, m) * v[l] * v[m];
  return s;
}

template <std::size_t N>
struct Trajectory
{
  std::vector<double> tau;
  std::vector<Vec<N>> theta;
  std::vector<Vec<N>> velocity;
  double tolerance = 0.0;
  std::size_t steps_accepted = 0;
  std::size_t steps_rejected = 0;
  bool aborted = false;
  std::string abort_reason;

  std::size_t size() const { return tau.size(); }
};

namespace detail {

inline void check_tolerance(double tol)
{
  if (!(tol >= 1e-13 && tol <= 1e-6)) throw DomainError("solver tolerance must lie in [1e-13, 1e-6]");
}

template <class Model>
std::string positivity_guard(const Vec<Model::dim>& theta)
{
  for (std::size_t k = 0; k < Model::dim; ++k)
    if (Model::positive[k] && !(theta[k] > kSigmaFloor))
      return std::string(Model::name) + " coordinate " + std::to_string(k) + " fell below the positivity floor";
  return {};
}

}  // namespace detail

/// Adaptive integration of the geodesic equations from `start` to tau_max.
/// Samples are written at every point of `grid` (plus the end points). On a
/// positivity or step-size failure the partial trajectory is returned with `aborted` set.
template <class Model>
Trajectory<Model::dim> integrate_geodesic_from(const GeodesicPoint<Model::dim>& start, double tau_max, double tol,
                                               std::span<const double> grid = {}, bool record_steps = false)
{
  constexpr std::size_t N = Model::dim;
  detail::check_tolerance(tol);
  using State = Vec<2 * N>;
  State y0;
  for (std::size_t i = 0; i < N; ++i) {
    y0[i] = start.theta[i];
    y0[N + i] = start.velocity[i];
  }
  auto rhs = [](double, const State& y) {
    Vec<N> th, v;
    for (std::size_t i = 0; i < N; ++i) {
      th[i] = y[i];
      v[i] = y[N + i];
    }
    const Vec<N> acc = geodesic_rhs<Model>(th, v);
    State d;
    for (std::size_t i = 0; i < N; ++i) {
      d[i] = v[i];
      d[N + i] = acc[i];
    }
    return d;
  };
  auto guard = [](double, const State& y) {
    Vec<N> th;
    for (std::size_t i = 0; i < N; ++i) th[i] = y[i];
    return detail::positivity_guard<Model>(th);
  };
  OdeOptions opt;
  opt.rtol = tol;
  opt.record_steps = record_steps;
  const auto sol = integrate_dopri5<2 * N>(rhs, start.tau, y0, tau_max, opt, grid, guard);

  Trajectory<N> tr;
  tr.tolerance = tol;
  tr.steps_accepted = sol.accepted;
  tr.steps_rejected = sol.rejected;
  tr.aborted = sol.aborted;
  tr.abort_reason = sol.abort_reason;
  for (std::size_t j = 0; j < sol.t.size(); ++j) {
    Vec<N> th, v;
    for (std::size_t i = 0; i < N; ++i) {
      th[i] = sol.y[j][i];
      v[i] = sol.y[j][N + i];
    }
    tr.tau.push_back(sol.t[j]);
    tr.theta.push_back(th);
    tr.velocity.push_back(v);
  }
  return tr;
}

/// Initial data are the closed-form values at tau = 0 (exact geodesic family).
inline Trajectory<3> integrate_geodesic(const GeodesicSpec3D& s, double tau_max, double tol,
                                        std::span<const double> grid = {})
{
  return integrate_geodesic_from<Gaussian3D>(closed_form_3d(s, 0.0), tau_max, tol, grid);
}

inline Trajectory<2> integrate_geodesic(const GeodesicSpec2D& s, double tau_max, double tol,
                                        std::span<const double> grid = {})
{
  return integrate_geodesic_from<Gaussian2D>(closed_form_2d(s, 0.0), tau_max, tol, grid);
}

/// Largest |numeric - closed form| over all samples and components.
template <std::size_t N>
double max_deviation(const Trajectory<N>& tr, const PathFunction<N>& path)
{
  double worst = 0.0;
  for (std::size_t j = 0; j < tr.size(); ++j) {
    const auto p = path(tr.tau[j]);
    for (std::size_t i = 0; i < N; ++i) worst = std::max(worst, std::abs(tr.theta[j][i] - p.theta[i]));
  }
  return worst;
}

/// Largest relative drift of g_lm v^l v^m from its initial value.
template <class Model>
double max_speed_drift(const Trajectory<Model::dim>& tr)
{
  const double s0 = fisher_speed<Model>(tr.theta.front(), tr.velocity.front());
  double worst = 0.0;
  for (std::size_t j = 0; j < tr.size(); ++j)
    worst = std::max(worst, std::abs(fisher_speed<Model>(tr.theta[j], tr.velocity[j]) - s0) / std::abs(s0));
  return worst;
}

template <std::size_t N>
struct ResidualReport
{
  double max_residual = 0.0;
  Vec<N> per_component{};
};

/// Plugs the path's analytic first derivatives and central-difference second
/// derivatives into the geodesic equations; reports the largest |residual|.
template <class Model>
ResidualReport<Model::dim> residual_check(const PathFunction<Model::dim>& path, std::span<const double> tau_grid,
                                          double h = 1e-5)
{
  constexpr std::size_t N = Model::dim;
  ResidualReport<N> rep;
  for (double tau : tau_grid) {
    const double step = h * std::max(1.0, std::abs(tau));
    const auto p = path(tau), pp = path(tau + step), pm = path(tau - step);
    const auto rhs = geodesic_rhs<Model>(p.theta, p.velocity);
    for (std::size_t k = 0; k < N; ++k) {
      const double acc = (pp.velocity[k] - pm.velocity[k]) / (2.0 * step);
      const double r = std::abs(acc - rhs[k]);
      rep.per_component[k] = std::max(rep.per_component[k], r);
      rep.max_residual = std::max(rep.max_residual, r);
    }
  }
  return rep;
}

inline std::vector<double> uniform_grid(double a, double b, std::size_t n)
{
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = (n == 1) ? b : a + (b - a) * double(i) / double(n - 1);
  return g;
}

}  // namespace igsoft
