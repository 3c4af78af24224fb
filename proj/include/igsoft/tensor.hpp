#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace igsoft {

/// Thrown when a parameter leaves the valid domain of a model (sigma <= 0, ...).
class DomainError : public std::domain_error
{
 public:
  using std::domain_error::domain_error;
};

/// Thrown when an integration cannot continue (positivity floor, step underflow).
class NumericalAbort : public std::runtime_error
{
 public:
  using std::runtime_error::runtime_error;
};

template <std::size_t N>
using Vec = std::array<double, N>;

/// Dense symmetric-by-convention N x N matrix, row major.
template <std::size_t N>
struct Matrix
{
  std::array<double, N * N> a{};

  double& operator()(std::size_t i, std::size_t j) { return a[i * N + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a[i * N + j]; }

  static Matrix diagonal(const Vec<N>& d)
  {
    Matrix m;
    for (std::size_t i = 0; i < N; ++i) m(i, i) = d[i];
    return m;
  }

  static Matrix identity()
  {
    Vec<N> ones;
    ones.fill(1.0);
    return diagonal(ones);
  }
};

template <std::size_t N>
double determinant(const Matrix<N>& m)
{
  static_assert(N >= 1 && N <= 3, "closed-form determinant only for N <= 3");
  if constexpr (N == 1) {
    return m(0, 0);
  } else if constexpr (N == 2) {
    return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  } else {
    return m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) -
           m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
           m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
  }
}

/// Cofactor inverse for the 1x1, 2x2 and 3x3 cases.
template <std::size_t N>
Matrix<N> inverse(const Matrix<N>& m)
{
  const double det = determinant(m);
  if (det == 0.0 || !std::isfinite(det)) throw DomainError("inverse: singular matrix");
  Matrix<N> r;
  if constexpr (N == 1) {
    r(0, 0) = 1.0 / m(0, 0);
  } else if constexpr (N == 2) {
    r(0, 0) = m(1, 1) / det;
    r(0, 1) = -m(0, 1) / det;
    r(1, 0) = -m(1, 0) / det;
    r(1, 1) = m(0, 0) / det;
  } else {
    r(0, 0) = (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) / det;
    r(0, 1) = (m(0, 2) * m(2, 1) - m(0, 1) * m(2, 2)) / det;
    r(0, 2) = (m(0, 1) * m(1, 2) - m(0, 2) * m(1, 1)) / det;
    r(1, 0) = (m(1, 2) * m(2, 0) - m(1, 0) * m(2, 2)) / det;
    r(1, 1) = (m(0, 0) * m(2, 2) - m(0, 2) * m(2, 0)) / det;
    r(1, 2) = (m(0, 2) * m(1, 0) - m(0, 0) * m(1, 2)) / det;
    r(2, 0) = (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0)) / det;
    r(2, 1) = (m(0, 1) * m(2, 0) - m(0, 0) * m(2, 1)) / det;
    r(2, 2) = (m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0)) / det;
  }
  return r;
}

/// Leading principal minors test. Returns false on the first non-positive minor.
template <std::size_t N>
bool is_positive_definite(const Matrix<N>& m)
{
  if (!(m(0, 0) > 0.0)) return false;
  if constexpr (N >= 2) {
    if (!(m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0) > 0.0)) return false;
  }
  if constexpr (N >= 3) {
    if (!(determinant(m) > 0.0)) return false;
  }
  return true;
}

template <std::size_t N>
bool is_symmetric(const Matrix<N>& m, double tol = 0.0)
{
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = i + 1; j < N; ++j)
      if (std::abs(m(i, j) - m(j, i)) > tol) return false;
  return true;
}

/// Metric tensor g_lm with its inverse g^lm cached at construction.
/// Construction validates symmetry and positive definiteness.
template <std::size_t N>
class MetricTensor
{
 public:
  explicit MetricTensor(const Matrix<N>& g) : g_(g)
  {
    if (!is_symmetric(g, 1e-12 * max_abs(g)))
      throw DomainError("metric tensor is not symmetric");
    if (!is_positive_definite(g))
      throw DomainError("metric tensor is not positive definite (leading principal minor <= 0)");
    inv_ = inverse(g);
  }

  double operator()(std::size_t l, std::size_t m) const { return g_(l, m); }
  double inv(std::size_t l, std::size_t m) const { return inv_(l, m); }
  const Matrix<N>& lower() const { return g_; }
  const Matrix<N>& upper() const { return inv_; }
  double det() const { return determinant(g_); }

  /// g_lm u^l v^m
  double inner(const Vec<N>& u, const Vec<N>& v) const
  {
    double s = 0.0;
    for (std::size_t l = 0; l < N; ++l)
      for (std::size_t m = 0; m < N; ++m) s += g_(l, m) * u[l] * v[m];
    return s;
  }

  double norm(const Vec<N>& u) const { return std::sqrt(inner(u, u)); }

 private:
  static double max_abs(const Matrix<N>& g)
  {
    double r = 0.0;
    for (double x : g.a) r = std::max(r, std::abs(x));
    return r;
  }

  Matrix<N> g_;
  Matrix<N> inv_;
};

/// Gamma^k_ij stored densely as [k][i][j]; zero entries are explicit.
template <std::size_t N>
struct ChristoffelSymbols
{
  std::array<double, N * N * N> c{};

  double& operator()(std::size_t k, std::size_t i, std::size_t j) { return c[(k * N + i) * N + j]; }
  double operator()(std::size_t k, std::size_t i, std::size_t j) const { return c[(k * N + i) * N + j]; }

  /// Sets Gamma^k_ij and Gamma^k_ji together.
  void set_sym(std::size_t k, std::size_t i, std::size_t j, double v)
  {
    (*this)(k, i, j) = v;
    (*this)(k, j, i) = v;
  }
};

/// Partial derivatives d_m Gamma^k_ij stored as [k][i][j][m].
template <std::size_t N>
struct ChristoffelGradient
{
  std::array<double, N * N * N * N> c{};

  double& operator()(std::size_t k, std::size_t i, std::size_t j, std::size_t m)
  {
    return c[((k * N + i) * N + j) * N + m];
  }
  double operator()(std::size_t k, std::size_t i, std::size_t j, std::size_t m) const
  {
    return c[((k * N + i) * N + j) * N + m];
  }
};

/// Riemann tensor R^a_{m n r} with the FIRST index raised, stored as [a][m][n][r].
///
/// Convention: R^a_{mnr} = d_n G^a_{mr} - d_r G^a_{mn} + G^a_{bn} G^b_{mr} - G^a_{br} G^b_{mn},
/// antisymmetric in (n, r). Ricci is the contraction R_{mr} = R^a_{mar}.
template <std::size_t N>
struct RiemannTensor
{
  std::array<double, N * N * N * N> c{};

  double& operator()(std::size_t a, std::size_t m, std::size_t n, std::size_t r)
  {
    return c[((a * N + m) * N + n) * N + r];
  }
  double operator()(std::size_t a, std::size_t m, std::size_t n, std::size_t r) const
  {
    return c[((a * N + m) * N + n) * N + r];
  }
};

template <std::size_t N>
struct RicciTensor
{
  Matrix<N> r;

  double operator()(std::size_t i, std::size_t j) const { return r(i, j); }
};

/// Curvature bundle returned by both the analytic and the numeric routes.
template <std::size_t N>
struct CurvatureSet
{
  RiemannTensor<N> riemann;
  RicciTensor<N> ricci;
  double scalar = 0.0;
};

/// R_{mr} = R^a_{m a r}
template <std::size_t N>
RicciTensor<N> contract_ricci(const RiemannTensor<N>& R)
{
  RicciTensor<N> ric;
  for (std::size_t m = 0; m < N; ++m)
    for (std::size_t r = 0; r < N; ++r) {
      double s = 0.0;
      for (std::size_t a = 0; a < N; ++a) s += R(a, m, a, r);
      ric.r(m, r) = s;
    }
  return ric;
}

template <std::size_t N>
double contract_scalar(const RicciTensor<N>& ric, const Matrix<N>& g_inv)
{
  double s = 0.0;
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = 0; j < N; ++j) s += g_inv(i, j) * ric(i, j);
  return s;
}

/// Fully covariant R_{a m n r} = g_{a b} R^b_{m n r}.
template <std::size_t N>
RiemannTensor<N> lower_first_index(const RiemannTensor<N>& R, const Matrix<N>& g)
{
  RiemannTensor<N> out;
  for (std::size_t a = 0; a < N; ++a)
    for (std::size_t m = 0; m < N; ++m)
      for (std::size_t n = 0; n < N; ++n)
        for (std::size_t r = 0; r < N; ++r) {
          double s = 0.0;
          for (std::size_t b = 0; b < N; ++b) s += g(a, b) * R(b, m, n, r);
          out(a, m, n, r) = s;
        }
  return out;
}

/// Assembles R^a_{mnr} from Christoffels and their gradient.
template <std::size_t N>
RiemannTensor<N> riemann_from_connection(const ChristoffelSymbols<N>& G, const ChristoffelGradient<N>& dG)
{
  RiemannTensor<N> R;
  for (std::size_t a = 0; a < N; ++a)
    for (std::size_t m = 0; m < N; ++m)
      for (std::size_t n = 0; n < N; ++n)
        for (std::size_t r = 0; r < N; ++r) {
          double s = dG(a, m, r, n) - dG(a, m, n, r);
          for (std::size_t b = 0; b < N; ++b) s += G(a, b, n) * G(b, m, r) - G(a, b, r) * G(b, m, n);
          R(a, m, n, r) = s;
        }
  return R;
}

}  // namespace igsoft
