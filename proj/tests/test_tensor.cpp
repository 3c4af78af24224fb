#include <gtest/gtest.h>

#include "igsoft/tensor.hpp"

using namespace igsoft;

TEST(Tensor, DeterminantAndInverse3)
{
  Matrix<3> m;
  m.a = {4, 1, 0, 1, 3, 1, 0, 1, 2};
  EXPECT_DOUBLE_EQ(determinant(m), 18.0);
  const auto inv = inverse(m);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < 3; ++k) s += m(i, k) * inv(k, j);
      EXPECT_NEAR(s, i == j ? 1.0 : 0.0, 1e-15);
    }
}

TEST(Tensor, DeterminantAndInverse2)
{
  Matrix<2> m;
  m.a = {2, 1, 1, 3};
  EXPECT_DOUBLE_EQ(determinant(m), 5.0);
  const auto inv = inverse(m);
  EXPECT_NEAR(inv(0, 0), 0.6, 1e-15);
  EXPECT_NEAR(inv(0, 1), -0.2, 1e-15);
  EXPECT_NEAR(inv(1, 1), 0.4, 1e-15);
}

TEST(Tensor, PositiveDefiniteness)
{
  EXPECT_TRUE(is_positive_definite(Matrix<3>::diagonal({1, 2, 3})));
  EXPECT_FALSE(is_positive_definite(Matrix<3>::diagonal({1, -2, 3})));
  Matrix<2> m;
  m.a = {1, 2, 2, 1};
  EXPECT_FALSE(is_positive_definite(m));
}

TEST(Tensor, MetricTensorValidates)
{
  Matrix<2> asym;
  asym.a = {1, 0.5, 0, 1};
  EXPECT_THROW(MetricTensor<2>{asym}, DomainError);
  EXPECT_THROW(MetricTensor<2>{Matrix<2>::diagonal({1, 0})}, DomainError);

  const MetricTensor<2> g(Matrix<2>::diagonal({1, 4}));
  EXPECT_DOUBLE_EQ(g.det(), 4.0);
  EXPECT_DOUBLE_EQ(g.inv(1, 1), 0.25);
  EXPECT_DOUBLE_EQ(g.norm({1, 1}), std::sqrt(5.0));
}

TEST(Tensor, RiemannOfZeroConnectionIsZero)
{
  const auto R = riemann_from_connection(ChristoffelSymbols<3>{}, ChristoffelGradient<3>{});
  for (double x : R.c) EXPECT_EQ(x, 0.0);
}
