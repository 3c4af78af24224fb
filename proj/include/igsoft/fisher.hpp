#pragma once

// Fisher-Rao metric from its defining expectation
//   g_lm(theta) = E_p[ d_l log p  d_m log p ]
// evaluated by quadrature over the microspace (x, y).

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "models.hpp"
#include "quadrature.hpp"

namespace igsoft {

enum class QuadratureScheme { gauss_hermite_product, truncated_grid };

class QuadratureSpec
{
 public:
  explicit QuadratureSpec(QuadratureScheme scheme = QuadratureScheme::gauss_hermite_product,
                          std::size_t nodes_per_axis = 32, double truncation_radius = 8.0)
      : scheme_(scheme), nodes_(nodes_per_axis), radius_(truncation_radius)
  {
    if (nodes_ < 8) throw DomainError("QuadratureSpec: nodes_per_axis must be >= 8");
    if (scheme_ == QuadratureScheme::truncated_grid && !(radius_ >= 6.0))
      throw DomainError("QuadratureSpec: truncation_radius must be >= 6");
  }

  QuadratureScheme scheme() const { return scheme_; }
  std::size_t nodes_per_axis() const { return nodes_; }
  double truncation_radius() const { return radius_; }

  QuadratureSpec doubled() const { return QuadratureSpec(scheme_, 2 * nodes_, radius_); }

 private:
  QuadratureScheme scheme_;
  std::size_t nodes_;
  double radius_;
};

template <std::size_t N>
struct FisherEstimate
{
  Matrix<N> metric;
  /// E_p[d_l log p]; zero for an exact quadrature.
  Vec<N> score_mean{};
  /// Largest entry change when the node count is doubled.
  double doubling_change = 0.0;
  bool converged = true;
  std::string diagnostic;
};

namespace detail {

/// One-dimensional rule for a Gaussian factor N(center, scale^2): nodes in x and
/// weights that already include the Gaussian density (sum to 1).
inline QuadratureRule gaussian_axis(const QuadratureSpec& q, double center, double scale)
{
  QuadratureRule out;
  if (q.scheme() == QuadratureScheme::gauss_hermite_product) {
    const QuadratureRule gh = gauss_hermite(q.nodes_per_axis());
    for (std::size_t i = 0; i < gh.nodes.size(); ++i) {
      out.nodes.push_back(center + std::numbers::sqrt2 * scale * gh.nodes[i]);
      out.weights.push_back(gh.weights[i] / std::sqrt(std::numbers::pi));
    }
  } else {
    // Trapezoid on [-R, R] standard deviations; spectrally accurate for Gaussian tails.
    const std::size_t n = q.nodes_per_axis();
    const double R = q.truncation_radius();
    const double h = 2.0 * R / double(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
      const double u = -R + h * double(i);
      const double w = (i == 0 || i + 1 == n) ? 0.5 : 1.0;
      out.nodes.push_back(center + scale * u);
      out.weights.push_back(w * h * std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi));
    }
  }
  return out;
}

/// Accumulates E[s s^T] and E[s] for a score function s(x, y) over a product rule.
/// Both densities here factor as N(mu_x, sx^2) x N(0, sy^2).
template <std::size_t N, class Score>
void accumulate_fisher(const QuadratureSpec& q, double mu, double sx, double sy, Score&& score,
                       Matrix<N>& g, Vec<N>& mean)
{
  const QuadratureRule rx = gaussian_axis(q, mu, sx);
  const QuadratureRule ry = gaussian_axis(q, 0.0, sy);
  const std::size_t n = rx.nodes.size() * ry.nodes.size();
  std::vector<std::vector<double>> outer(N * N, std::vector<double>(n));
  std::vector<std::vector<double>> first(N, std::vector<double>(n));
  std::size_t idx = 0;
  for (std::size_t i = 0; i < rx.nodes.size(); ++i)
    for (std::size_t j = 0; j < ry.nodes.size(); ++j, ++idx) {
      const double w = rx.weights[i] * ry.weights[j];
      const Vec<N> s = score(rx.nodes[i], ry.nodes[j]);
      for (std::size_t l = 0; l < N; ++l) {
        first[l][idx] = w * s[l];
        for (std::size_t m = 0; m < N; ++m) outer[l * N + m][idx] = w * s[l] * s[m];
      }
    }
  for (std::size_t l = 0; l < N; ++l) {
    mean[l] = pairwise_sum(first[l]);
    for (std::size_t m = 0; m < N; ++m) g(l, m) = pairwise_sum(outer[l * N + m]);
  }
  // symmetrise: average of the lm and ml entries
  for (std::size_t l = 0; l < N; ++l)
    for (std::size_t m = l + 1; m < N; ++m) g(l, m) = g(m, l) = 0.5 * (g(l, m) + g(m, l));
}

inline Vec<3> score3d(const ParameterPoint3D& t, double x, double y)
{
  const double sx = t.sigma_x(), sy = t.sigma_y(), dx = x - t.mu_x();
  return {dx / (sx * sx), -1.0 / sx + dx * dx / (sx * sx * sx), -1.0 / sy + y * y / (sy * sy * sy)};
}

inline Vec<2> score2d(const ParameterPoint2D& t, const Model2DConfig& cfg, double x, double y)
{
  const double s = t.sigma(), S2 = cfg.capital_sigma_sq(), dx = x - t.mu_x();
  return {dx / (s * s), dx * dx / (s * s * s) - s * y * y / (S2 * S2)};
}

template <std::size_t N>
double max_entry_change(const Matrix<N>& a, const Matrix<N>& b)
{
  double d = 0.0;
  for (std::size_t i = 0; i < N * N; ++i) d = std::max(d, std::abs(a.a[i] - b.a[i]));
  return d;
}

template <std::size_t N, class Eval>
FisherEstimate<N> with_doubling_check(const QuadratureSpec& q, double tolerance, Eval&& eval)
{
  FisherEstimate<N> est;
  eval(q, est.metric, est.score_mean);
  Matrix<N> fine;
  Vec<N> unused{};
  eval(q.doubled(), fine, unused);
  est.doubling_change = max_entry_change(est.metric, fine);
  est.converged = est.doubling_change <= tolerance;
  if (!est.converged)
    est.diagnostic = "quadrature not converged: entry change " + std::to_string(est.doubling_change) +
                     " exceeds " + std::to_string(tolerance) + " when nodes are doubled";
  return est;
}

}  // namespace detail

/// Fisher metric of the 3D model by quadrature. The result carries a doubling
/// convergence diagnostic rather than throwing on nonconvergence.
inline FisherEstimate<3> fisher_numeric_3d(const ParameterPoint3D& t, const QuadratureSpec& q = QuadratureSpec{},
                                           double tolerance = 1e-9)
{
  return detail::with_doubling_check<3>(q, tolerance, [&](const QuadratureSpec& qs, Matrix<3>& g, Vec<3>& mean) {
    detail::accumulate_fisher<3>(qs, t.mu_x(), t.sigma_x(), t.sigma_y(),
                                 [&](double x, double y) { return detail::score3d(t, x, y); }, g, mean);
  });
}

/// Fisher metric of the 2D model; y is Gaussian with effective sigma_y = Sigma^2 / sigma.
inline FisherEstimate<2> fisher_numeric_2d(const ParameterPoint2D& t, const Model2DConfig& cfg,
                                           const QuadratureSpec& q = QuadratureSpec{}, double tolerance = 1e-9)
{
  const double sy = cfg.capital_sigma_sq() / t.sigma();
  return detail::with_doubling_check<2>(q, tolerance, [&](const QuadratureSpec& qs, Matrix<2>& g, Vec<2>& mean) {
    detail::accumulate_fisher<2>(qs, t.mu_x(), t.sigma(), sy,
                                 [&](double x, double y) { return detail::score2d(t, cfg, x, y); }, g, mean);
  });
}

}  // namespace igsoft
