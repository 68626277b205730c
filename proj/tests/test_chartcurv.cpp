#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "sigmalab/chartcurv.hpp"
#include "sigmalab/errors.hpp"
#include "sigmalab/symalg.hpp"

using namespace sigmalab;

namespace {

JetMatrix random_polynomial_metric(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  auto b = MonomialBasis::get(n, kDefaultXDeg);
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = U(rng);
  const Eigen::MatrixXd base = a * a.transpose() + n * Eigen::MatrixXd::Identity(n, n);
  JetMatrix g(n, PolyJet(b, kDefaultTDeg));
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      PolyJet e = PolyJet::constant(b, kDefaultTDeg, base(i, j));
      for (int p = 0; p < n; ++p) {
        const PolyJet xp = PolyJet::coordinate(b, kDefaultTDeg, p);
        e += xp * (0.1 * U(rng));
        for (int q = p; q < n; ++q) e += xp * PolyJet::coordinate(b, kDefaultTDeg, q) * (0.1 * U(rng));
      }
      g(i, j) = e;
      g(j, i) = e;
    }
  return g;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace

TEST_CASE("flat metric has no curvature") {
  const auto c = curvature_at_base(ChartMetricJet::euclidean(3));
  CHECK(c.scalar.max_abs() == 0.0);
  for (int k = 1; k <= 3; ++k) CHECK(sigma_k_at_base(c, k).max_abs() == 0.0);
}

TEST_CASE("unit three-sphere chart") {
  const auto chart = SphereChart::interior(3, 1.0);
  const auto c = curvature_at_base(chart.metric());
  CHECK(c.scalar.value() == doctest::Approx(6.0).epsilon(1e-12));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      CHECK(std::abs(c.ricci(i, j).value() - 2.0 * c.metric(i, j).value()) < 1e-12);
  CHECK(sigma_k_at_base(c, 1).value() == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(sigma_k_at_base(c, 2).value() == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(sigma_k_at_base(c, 3).value() == doctest::Approx(0.125).epsilon(1e-12));
  // Riemann sign: R_{ikjl} = g_ij g_kl - g_il g_kj on the unit sphere.
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k)
      for (int j = 0; j < 3; ++j)
        for (int l = 0; l < 3; ++l) {
          const auto& g = c.metric;
          const double expect = g(i, j).value() * g(k, l).value() - g(i, l).value() * g(k, j).value();
          CHECK(std::abs(c.riemann(i, k, j, l).value() - expect) < 1e-12);
        }
}

TEST_CASE("scaling the sphere metric") {
  for (double cs : {0.5, 2.0}) {
    const auto c1 = curvature_at_base(SphereChart::interior(3, 1.0).metric());
    const auto c2 = curvature_at_base(SphereChart::interior(3, cs).metric());
    CHECK(rel(c2.scalar.value(), c1.scalar.value() / (cs * cs)) < 1e-10);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) CHECK(std::abs(c2.ricci(i, j).value() - c1.ricci(i, j).value()) < 1e-10);
    for (int k = 1; k <= 3; ++k) {
      CHECK(rel(sigma_k_at_base(c2, k).value(), std::pow(cs, -2 * k) * sigma_k_at_base(c1, k).value()) < 1e-10);
    }
  }
  const auto c = curvature_at_base(SphereChart::interior(3, 2.0).metric());
  CHECK(sigma_k_at_base(c, 2).value() == doctest::Approx(0.046875).epsilon(1e-12));
}

TEST_CASE("ricci is invariant under constant rescaling of polynomial metrics") {
  std::mt19937_64 rng(5);
  const ChartMetricJet g(random_polynomial_metric(3, rng));
  const auto c1 = curvature_at_base(g);
  for (double cs : {0.5, 2.0}) {
    JetMatrix scaled = g.components();
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) scaled(i, j) = scaled(i, j) * (cs * cs);
    const auto c2 = curvature_at_base(ChartMetricJet(scaled));
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) CHECK(rel(c2.ricci(i, j).value(), c1.ricci(i, j).value()) < 1e-10);
    CHECK(rel(c2.scalar.value(), c1.scalar.value() / (cs * cs)) < 1e-10);
    for (int k = 1; k <= 3; ++k)
      CHECK(std::abs(sigma_k_at_base(c2, k).value() - std::pow(cs, -2 * k) * sigma_k_at_base(c1, k).value()) <
            1e-10 * (1 + std::abs(sigma_k_at_base(c1, k).value())));
  }
}

TEST_CASE("riemann symmetries on random polynomial metric paths") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + trial % 3;
    const ChartMetricJet g0(random_polynomial_metric(n, rng));
    const ChartMetricJet g = g0.perturbed(random_polynomial_metric(n, rng));
    const auto c = curvature_at_base(g);
    const auto& R = c.riemann;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int cc = 0; cc < n; ++cc)
          for (int d = 0; d < n; ++d)
            for (int p = 0; p <= 2; ++p) {
              const double v = R(a, b, cc, d).t_coeff(p);
              REQUIRE(std::abs(v + R(b, a, cc, d).t_coeff(p)) < 1e-9);
              REQUIRE(std::abs(v + R(a, b, d, cc).t_coeff(p)) < 1e-9);
              REQUIRE(std::abs(v - R(cc, d, a, b).t_coeff(p)) < 1e-9);
              const double bianchi = v + R(a, cc, d, b).t_coeff(p) + R(a, d, b, cc).t_coeff(p);
              REQUIRE(std::abs(bianchi) < 1e-9);
            }
    // t^0 part equals the curvature of the unperturbed metric.
    const auto c0 = curvature_at_base(g0);
    REQUIRE(std::abs(c.scalar.t_coeff(0) - c0.scalar.t_coeff(0)) < 1e-12);
  }
}

TEST_CASE("both sigma routes agree along a path") {
  std::mt19937_64 rng(23);
  const ChartMetricJet g0(random_polynomial_metric(3, rng));
  const ChartMetricJet g = g0.perturbed(random_polynomial_metric(3, rng));
  const auto c = curvature_at_base(g);
  for (int k = 1; k <= 3; ++k) {
    const PolyJet jet = sigma_k_at_base(c, k);
    // sampled route at t = 0 must match; at small t the truncated jets agree to O(t^3).
    CHECK(std::abs(sigma_k_sampled(c, k, 0.0) - jet.t_coeff(0)) < 1e-10 * (1 + std::abs(jet.t_coeff(0))));
  }
}

TEST_CASE("two overlapping sphere charts give the same sigma_k") {
  const auto a = SphereChart::interior(3, 1.3);
  Eigen::MatrixXd q = Eigen::MatrixXd::Identity(4, 4);
  const double th = 0.4;
  q(0, 0) = std::cos(th);
  q(0, 1) = -std::sin(th);
  q(1, 0) = std::sin(th);
  q(1, 1) = std::cos(th);
  const auto b = SphereChart::centered_at(a.base_point(), q);
  CHECK((b.base_point() - a.base_point()).norm() < 1e-12);
  const auto ca = curvature_at_base(a.metric());
  const auto cb = curvature_at_base(b.metric());
  for (int k = 1; k <= 3; ++k)
    CHECK(rel(sigma_k_at_base(ca, k).value(), sigma_k_at_base(cb, k).value()) < 1e-8);
}

TEST_CASE("chart metric validation") {
  auto b = MonomialBasis::get(2, 1);
  JetMatrix g(2, PolyJet(b, 2));
  g(0, 0) = PolyJet::constant(b, 2, 1.0);
  g(1, 1) = PolyJet::constant(b, 2, -1.0);
  CHECK_THROWS_AS(ChartMetricJet{g}, GeometryError);
  g(1, 1) = PolyJet::constant(b, 2, 1.0);
  CHECK_THROWS_AS(curvature_at_base(ChartMetricJet(g)), CapabilityError);
  g(0, 1) = PolyJet::constant(b, 2, 0.1);
  CHECK_THROWS_AS(ChartMetricJet{g}, DomainError);
}
