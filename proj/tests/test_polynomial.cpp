#include "xcoupler/polynomial.hpp"

#include <gtest/gtest.h>

#include <algorithm>

using namespace xcoupler;

namespace {

bool has_root(const std::vector<cplx>& roots, cplx r, double tol) {
  return std::any_of(roots.begin(), roots.end(),
                     [&](cplx x) { return std::abs(x - r) < tol; });
}

}  // namespace

TEST(Polynomial, EvaluateAndDegree) {
  const Polynomial p({1.0, 0.0, 2.0, 0.0});
  EXPECT_EQ(p.degree(), 2);
  EXPECT_EQ(p(cplx(2.0, 0.0)), cplx(9.0, 0.0));
  EXPECT_EQ(Polynomial().degree(), 0);
}

TEST(Polynomial, Arithmetic) {
  const Polynomial a({1.0, 1.0});
  const Polynomial b({-1.0, 1.0});
  const Polynomial prod = a * b;
  EXPECT_EQ(prod.degree(), 2);
  EXPECT_EQ(prod[0], cplx(-1.0));
  EXPECT_EQ(prod[1], cplx(0.0));
  EXPECT_EQ(prod[2], cplx(1.0));
  EXPECT_EQ((a + b)[0], cplx(0.0));
  EXPECT_EQ((a - b)[0], cplx(2.0));
  EXPECT_EQ((cplx(0, 1) * a)[1], cplx(0, 1));
  EXPECT_EQ(Polynomial({1.0, 2.0, 3.0}).derivative()[1], cplx(6.0));
}

TEST(Polynomial, ParaconjugateOnImaginaryAxis) {
  const Polynomial p({cplx(1, 2), cplx(-0.5, 0.3), cplx(2, -1), cplx(0.1, 0.7)});
  const Polynomial q = p.paraconjugate();
  for (double w : {-2.0, -0.3, 0.0, 0.9, 3.0}) {
    const cplx s(0.0, w);
    EXPECT_NEAR(std::abs(q(s) - std::conj(p(s))), 0.0, 1e-12);
  }
}

TEST(Polynomial, RootsRecovered) {
  const std::vector<cplx> want{{-0.3, 1.2}, {-0.3, -1.2}, {-1.0, 0.0}, {0.0, 1.3819}, {-0.05, 0.4}};
  const Polynomial p = Polynomial::from_roots(want);
  EXPECT_EQ(p.degree(), 5);
  EXPECT_EQ(p.leading(), cplx(1.0));
  const auto got = p.roots();
  ASSERT_EQ(got.size(), want.size());
  for (const cplx r : want) EXPECT_TRUE(has_root(got, r, 1e-10)) << r;
}

TEST(Polynomial, RootsOfClusteredPolynomial) {
  const std::vector<cplx> want{{1.0, 0.0}, {1.001, 0.0}, {-2.0, 0.5}};
  const auto got = Polynomial::from_roots(want).roots();
  for (const cplx r : want) EXPECT_TRUE(has_root(got, r, 1e-7)) << r;
}
