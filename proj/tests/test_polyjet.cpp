#include "doctest.h"

#include <cmath>

#include "sigmalab/errors.hpp"
#include "sigmalab/polyjet.hpp"

using namespace sigmalab;

TEST_CASE("t_derivatives of a pure t polynomial") {
  auto b = MonomialBasis::get(2, 4);
  const PolyJet t = PolyJet::parameter(b, 2);
  const PolyJet q = 3.0 + 5.0 * t + 7.0 * (t * t);
  const auto d = t_derivatives(q);
  CHECK(d.value == 3.0);
  CHECK(d.first == 5.0);
  CHECK(d.second == 14.0);
  const auto c = t_derivatives(PolyJet::constant(b, 2, 4.5));
  CHECK(c.value == 4.5);
  CHECK(c.first == 0.0);
  CHECK(c.second == 0.0);
  CHECK_THROWS_AS(t_derivatives(PolyJet::constant(b, 1, 1.0), 2), CapabilityError);
}

TEST_CASE("products truncate and derivatives lower the exact degree") {
  auto b = MonomialBasis::get(2, 4);
  const PolyJet x = PolyJet::coordinate(b, 0, 0);
  const PolyJet y = PolyJet::coordinate(b, 0, 1);
  const PolyJet p = (1.0 + x) * (1.0 + x) * (1.0 + x) * (1.0 + x) * (1.0 + y);
  CHECK(p.coeff(0, std::vector<int>{4, 0}) == 1.0);
  CHECK(p.coeff(0, std::vector<int>{3, 1}) == 4.0);
  CHECK(p.coeff(0, std::vector<int>{4, 1}) == 0.0);
  const PolyJet dx = p.derivative(0);
  CHECK(dx.xdeg() == 3);
  CHECK(dx.coeff(0, std::vector<int>{2, 1}) == 12.0);
  CHECK(dx.derivative(0).derivative(0).derivative(1).xdeg() == 0);
  CHECK_THROWS_AS(p.truncated(0).derivative(0), CapabilityError);
}

TEST_CASE("transcendental compositions match Taylor series") {
  auto b = MonomialBasis::get(1, 4);
  const PolyJet x = PolyJet::coordinate(b, 0, 0);
  const PolyJet s = (x + 0.3).sin();
  const PolyJet e = (x * 2.0).exp();
  const PolyJet inv = (2.0 + x).inverse();
  for (double xv : {0.01, -0.02}) {
    Eigen::VectorXd pt(1);
    pt << xv;
    CHECK(s.eval(pt, 0) == doctest::Approx(std::sin(0.3 + xv)).epsilon(1e-9));
    CHECK(e.eval(pt, 0) == doctest::Approx(std::exp(2 * xv)).epsilon(1e-9));
    CHECK(inv.eval(pt, 0) == doctest::Approx(1.0 / (2.0 + xv)).epsilon(1e-10));
  }
  const PolyJet r = (4.0 + x).sqrt();
  CHECK((r * r - (4.0 + x)).max_abs() < 1e-14);
  CHECK(((x + 1.5).log().exp() - (x + 1.5)).max_abs() < 1e-13);
}

TEST_CASE("neumann inverse is exact within truncation") {
  auto b = MonomialBasis::get(2, 3);
  const PolyJet x = PolyJet::coordinate(b, 2, 0);
  const PolyJet y = PolyJet::coordinate(b, 2, 1);
  const PolyJet t = PolyJet::parameter(b, 2);
  JetMatrix g(2, PolyJet(b, 2));
  g(0, 0) = 2.0 + x * y + t;
  g(0, 1) = 0.3 * x + t * y;
  g(1, 0) = g(0, 1);
  g(1, 1) = 1.0 + y * y - 0.5 * t * x;
  const JetMatrix gi = neumann_inverse(g);
  const JetMatrix id = g * gi;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) CHECK((id(i, j) - (i == j ? 1.0 : 0.0)).max_abs() < 1e-14);
  JetMatrix sing(2, PolyJet(b, 2));
  sing(0, 0) = PolyJet::constant(b, 2, 1.0);
  CHECK_THROWS_AS(neumann_inverse(sing), GeometryError);
}
