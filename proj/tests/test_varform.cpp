#include "doctest.h"

#include <cmath>
#include <numbers>

#include "sigmalab/errors.hpp"
#include "sigmalab/symalg.hpp"
#include "sigmalab/varform.hpp"

using namespace sigmalab;

namespace {

constexpr double pi = std::numbers::pi;

JetMatrix scaled_metric(const ChartMetricJet& g, double c) {
  JetMatrix h(g.dim(), g.zero());
  for (int i = 0; i < g.dim(); ++i)
    for (int j = 0; j < g.dim(); ++j) h(i, j) = g(i, j).t_constant() * c;
  return h;
}

JetMatrix constant_jet(const ChartMetricJet& g, const Eigen::MatrixXd& m) {
  JetMatrix h(g.dim(), g.zero());
  for (int i = 0; i < g.dim(); ++i)
    for (int j = 0; j < g.dim(); ++j) h(i, j) = PolyJet::constant(g.basis(), g.tdeg(), m(i, j));
  return h;
}

}  // namespace

TEST_CASE("randomized pointwise variation comparators") {
  const auto cases = random_lemma_cases(30, 20240611ULL);
  int checked = 0;
  for (std::size_t c = 0; c < cases.size(); ++c) {
    for (const auto& r : verify_case(cases[c], static_cast<int>(c))) {
      INFO(r.id << " formula " << r.formula << " oracle " << r.oracle << " residual " << r.rel_residual);
      CHECK(r.pass);
      ++checked;
    }
  }
  CHECK(checked > 300);
}

TEST_CASE("random lemma cases are reproducible") {
  const auto a = random_lemma_cases(6, 7);
  const auto b = random_lemma_cases(6, 7);
  for (std::size_t c = 0; c < a.size(); ++c) {
    const auto ra = verify_case(a[c], 0);
    const auto rb = verify_case(b[c], 0);
    REQUIRE(ra.size() == rb.size());
    for (std::size_t i = 0; i < ra.size(); ++i) CHECK(ra[i].formula == rb[i].formula);
  }
}

TEST_CASE("inverse metric variations") {
  Eigen::MatrixXd h(3, 3);
  h << 1, 2, 0, 2, -1, 0.5, 0, 0.5, 3;
  const MatrixVariation v = dg_inverse_variations(Eigen::MatrixXd::Identity(3, 3), h);
  CHECK((v.first + h).norm() == doctest::Approx(0.0));
  CHECK((v.second - 2.0 * h * h).norm() < 1e-14);
  const ScalarVariation d = dvol_density(h);
  CHECK(d.first == doctest::Approx(1.5));
  CHECK(d.second == doctest::Approx((9.0 - 2.0 * h.squaredNorm()) / 4.0));
}

TEST_CASE("constant h on flat space leaves Ricci unchanged") {
  const auto g = ChartMetricJet::euclidean(3);
  Eigen::MatrixXd m(3, 3);
  m << 0.3, 0.1, -0.2, 0.1, 0.5, 0.4, -0.2, 0.4, -0.7;
  const PerturbationFields f = fields_from_chart(g, constant_jet(g, m));
  CHECK(dric_first(f).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(dric_second(f).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(std::abs(gamma_op(f)) < 1e-14);
}

TEST_CASE("gamma of the metric itself on the unit 3-sphere") {
  const auto g = SphereChart::interior(3, 1.0).metric();
  const PerturbationFields f = fields_from_chart(g, scaled_metric(g, 1.0));
  CHECK(gamma_op(f) == doctest::Approx(-6.0).epsilon(1e-12));
  CHECK(einstein_lambda(f) == doctest::Approx(1.0).epsilon(1e-12));
  // sigma_1 route through the scalar linearization
  CHECK(dsigma_k_first_einstein(f, 1) == doctest::Approx(0.25 * gamma_op(f)).epsilon(1e-12));
}

TEST_CASE("second sigma_k variation along h = c g") {
  for (int n : {3, 4}) {
    const auto g = SphereChart::interior(n, 1.0).metric();
    for (double c : {0.5, -1.25}) {
      const PerturbationFields f = fields_from_chart(g, scaled_metric(g, c));
      for (int k = 1; k <= n; ++k) {
        const double sk = std::pow(0.5 * (n - 2), k) * binomial(n, k);
        CHECK(dsigma_k_second_einstein(f, k).total == doctest::Approx(k * (k + 1) * c * c * sk).epsilon(1e-10));
        CHECK(dsigma_k_first_einstein(f, k) == doctest::Approx(-k * c * sk).epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("first Ricci variation is linear in h") {
  const auto cases = random_lemma_cases(9, 99);
  int pairs = 0;
  for (std::size_t c = 0; c < 3; ++c) {
    // Cases six apart share a background type and dimension; b's polynomial is reused on a's chart.
    const auto& a = cases[c];
    const auto& b = cases[c + 6];
    REQUIRE(a.g.dim() == b.g.dim());
    const JetMatrix hb = b.h;
    ++pairs;
    const PerturbationFields fa = fields_from_chart(a.g, a.h);
    const PerturbationFields fb = fields_from_chart(a.g, hb);
    const PerturbationFields fs = fields_from_chart(a.g, a.h + hb);
    CHECK((dric_first(fs) - dric_first(fa) - dric_first(fb)).cwiseAbs().maxCoeff() < 1e-11);
    CHECK(gamma_op(fs) == doctest::Approx(gamma_op(fa) + gamma_op(fb)).epsilon(1e-11));
    CHECK(dsigma_k_first_einstein(fs, 2) ==
          doctest::Approx(dsigma_k_first_einstein(fa, 2) + dsigma_k_first_einstein(fb, 2)).epsilon(1e-11));
  }
  CHECK(pairs == 3);
}

TEST_CASE("literal curvature index reading fails on curved charts only") {
  const auto cases = random_lemma_cases(12, 3);
  bool curved_fail = false;
  for (const auto& c : cases) {
    const PerturbationFields f = fields_from_chart(c.g, c.h);
    const JetOracle o = jet_oracle(c.g, c.h);
    const double lit = (dric_second(f, RiemannReading::literal) - o.ric_second).cwiseAbs().maxCoeff();
    const double sw = (dric_second(f, RiemannReading::swapped_pair) - o.ric_second).cwiseAbs().maxCoeff();
    const double sc = std::max(1.0, o.ric_second.cwiseAbs().maxCoeff());
    CHECK(sw / sc < 1e-8);
    if (c.background.rfind("flat", 0) == 0)
      CHECK(lit / sc < 1e-8);
    else if (lit / sc > 1e-3)
      curved_fail = true;
  }
  CHECK(curved_fail);
}

TEST_CASE("non-Einstein background is rejected for sigma_k variations") {
  const auto g = SphereChart::interior(3, 1.0).metric();
  PerturbationFields f = fields_from_chart(g, scaled_metric(g, 1.0));
  f.ricci(0, 0) += 0.3;
  CHECK_THROWS_AS(einstein_lambda(f), PreconditionError);
  CHECK_THROWS_AS(dsigma_k_first_einstein(f, 2), PreconditionError);
}

TEST_CASE("volume variation integrated on the 3-sphere") {
  const auto model = SphereModel::build(3, 1.0, 10);
  const double c = 0.7;
  const IntegratedVariation v = dvol_variations(model, AmbientQuadratic::constant(4, 2.0 * c));
  CHECK(v.formula.first == doctest::Approx(3.0 * c * 2.0 * pi * pi).epsilon(1e-12));
  CHECK(v.oracle.first == doctest::Approx(v.formula.first).epsilon(1e-12));
  CHECK(v.oracle.second == doctest::Approx(v.formula.second).epsilon(1e-12));
  for (const auto& p : harmonic_library(3)) {
    const IntegratedVariation w = dvol_variations(model, p.u);
    CHECK(std::abs(w.formula.first - w.oracle.first) < 1e-10);
    CHECK(std::abs(w.formula.second - w.oracle.second) < 1e-10);
  }
}

TEST_CASE("integrated Schouten identities for conformal directions") {
  for (int n : {3, 4}) {
    const auto model = SphereModel::build(n, 1.0, n == 3 ? 12 : 8);
    for (const auto& p : harmonic_library(n)) {
      for (const auto& r : integrated_identities(model, p.u)) {
        INFO(p.label << " " << r.id << " residual " << r.rel_residual);
        CHECK(r.pass);
        CHECK(r.rel_residual < 1e-10);
      }
    }
  }
  // Non-unit radius.
  const auto model = SphereModel::build(3, 2.5, 10);
  for (const auto& p : harmonic_library(3))
    for (const auto& r : integrated_identities(model, p.u)) CHECK(r.pass);
}

TEST_CASE("report residuals") {
  const auto r = make_report("x", "anchor", 1.0 + 1e-9, 1.0, 1e-8);
  CHECK(r.pass);
  CHECK(r.rel_residual == doctest::Approx(1e-9).epsilon(1e-6));
  const auto q = make_report("y", "anchor", 1e-3, 0.0, 1e-8);
  CHECK_FALSE(q.pass);
  CHECK(q.abs_residual == doctest::Approx(1e-3));
}
