#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <numbers>

#include "sigmalab/errors.hpp"
#include "sigmalab/functional.hpp"
#include "sigmalab/symalg.hpp"

using namespace sigmalab;

namespace {

constexpr double pi = std::numbers::pi;

FunctionalConfig make_cfg(int n, int k, int l, double lambda = 1.0, double vol = 1.0) {
  FunctionalConfig c;
  c.n = n;
  c.k = k;
  c.l = l;
  c.lambda = lambda;
  c.volume = vol;
  return c;
}

const int kTuples[6][3] = {{3, 2, 0}, {3, 2, 1}, {3, 3, 1}, {4, 2, 0}, {4, 2, 1}, {4, 3, 1}};

double l2_norm2_conformal(const SphereModel& m, const AmbientQuadratic& u) {
  return m.dim() * m.integrate([&](const SphereNode& nd) {
    const double v = u.value(nd.x);
    return v * v;
  });
}

}  // namespace

TEST_CASE("coefficient algebra example") {
  const Coefficients c = coefficients(make_cfg(4, 2, 0));
  CHECK(c.alpha == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(c.mu == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(c.beta == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(c.a_coeff == doctest::Approx(-324.0).epsilon(1e-15));
  FunctionalConfig alt = make_cfg(4, 2, 0);
  alt.beta_variant = BetaVariant::two_n_minus_l;
  CHECK(coefficients(alt).beta == doctest::Approx(4.0).epsilon(1e-15));
}

TEST_CASE("configuration validation") {
  CHECK_THROWS_AS(make_cfg(6, 3, 4).validate(), DomainError);
  CHECK_THROWS_AS(make_cfg(4, 3, 2).validate(), DomainError);
  CHECK_THROWS_AS(make_cfg(4, 1, 1).validate(), DomainError);
  CHECK_THROWS_AS(make_cfg(2, 1, 0).validate(), DomainError);
  CHECK_THROWS_AS(make_cfg(4, 2, 0, 0.0).validate(), DomainError);
  CHECK_THROWS_AS(coefficients(make_cfg(6, 3, 4)), DomainError);
  CHECK_NOTHROW(make_cfg(5, 4, 3, -1.0).validate());
  CHECK(parse_beta_variant("n-2l") == BetaVariant::n_minus_2l);
  CHECK(parse_beta_variant("2n-l") == BetaVariant::two_n_minus_l);
  CHECK_THROWS_AS(parse_beta_variant("n"), DomainError);
}

TEST_CASE("a(n,k,l) negative and mu positive for every valid triple up to n = 10") {
  int count = 0;
  for (int n = 3; n <= 10; ++n)
    for (int k = 1; k <= n; ++k)
      for (int l = 0; l < k; ++l) {
        const FunctionalConfig cfg = make_cfg(n, k, l, 1.0, 2.0);
        if (2 * l == n || (k == 1 && l != 0)) continue;
        const Coefficients c = coefficients(cfg);
        CHECK(c.a_coeff < 0.0);
        if (k >= 2) {
          CHECK(c.mu > 0.0);
          CHECK(c.alpha > 0.0);
          CHECK(n * (k - 1) - 2 * l * (k - l) > 0);
        }
        // beta (n-2l) sign follows l versus n/2
        CHECK((c.beta > 0.0) == (k == 1 || 2 * l < n));
        ++count;
      }
  CHECK(count > 150);
}

TEST_CASE("k = 1 route agrees with the general algebra at l = 0") {
  for (int n = 3; n <= 8; ++n) {
    const FunctionalConfig cfg = make_cfg(n, 1, 0, 1.7, 1.3);
    const Coefficients d = coefficients(cfg);
    const Coefficients g = coefficients_general_l0(cfg);
    CHECK(d.k1_route);
    const double lam = cfg.lambda;
    const double L = -2.5, N = 0.8, J = 3.1;
    // General route: I = int h.Delta_E((k-1)Delta_E - mu lambda)h with k = 1.
    const double general = g.a_coeff * std::pow(lam, n - 1) * (g.alpha / lam * (L * (-g.mu * lam) * N) + g.beta * J);
    const SecondVariationBreakdown b = d2F_formula(cfg, TraceFreeEigen{L, N}, J);
    CHECK(b.total == doctest::Approx(general).epsilon(1e-12));
    CHECK(b.total == doctest::Approx(b.a_coeff * std::pow(lam, n - 1) * (b.alpha / lam * b.I_term + b.beta * b.J_term))
                         .epsilon(1e-12));
  }
}

TEST_CASE("F on the round 3-sphere") {
  const auto model = SphereModel::build(3, 1.0, 10);
  FunctionalConfig cfg = make_cfg(3, 2, 0, 1.0, model.quadrature_volume());
  SpherePathEvaluator ev(model, ConformalPath{ConformalPath::Kind::exponential, AmbientQuadratic::zero(4), 0.0});
  const FunctionalValue v = ev.F(cfg, 0.0);
  const double V = 2 * pi * pi;
  CHECK(v.F == doctest::Approx(std::pow(V, 4) * std::pow(0.75 * V, 3)).epsilon(1e-12));
  CHECK(v.int_sigma_l == doctest::Approx(V).epsilon(1e-12));
  CHECK(v.int_sigma_k == doctest::Approx(0.75 * V).epsilon(1e-12));
  CHECK(ev.F_increment(cfg, 0.0) == 0.0);
  const auto lib = harmonic_library(3);
  for (auto kind : {ConformalPath::Kind::exponential, ConformalPath::Kind::linear}) {
    SpherePathEvaluator pe(model, ConformalPath{kind, lib[7].u, 0.0});
    const double d = pe.F(cfg, 0.1).F - pe.F(cfg, 0.0).F;
    CHECK(pe.F_increment(cfg, 0.1) == doctest::Approx(d).epsilon(1e-11));
  }
}

TEST_CASE("scaling invariance of F") {
  const auto model = SphereModel::build(3, 1.0, 10);
  const auto lib = harmonic_library(3);
  const AmbientQuadratic u = lib[0].u + lib[5].u * 0.5;
  for (const auto& t : kTuples) {
    if (t[0] != 3) continue;
    const FunctionalConfig cfg = make_cfg(3, t[1], t[2], 1.0, model.quadrature_volume());
    SpherePathEvaluator base(model, ConformalPath{ConformalPath::Kind::exponential, u, 0.0});
    const double F0 = base.F(cfg, 0.05).F;
    for (double c : {0.5, 1.3, 2.0}) {
      SpherePathEvaluator scaled(model, ConformalPath{ConformalPath::Kind::exponential, u, std::log(c)});
      CHECK(std::abs(scaled.F(cfg, 0.05).F - F0) <= 1e-10 * std::abs(F0));
    }
  }
  const FunctionalConfig pc = make_cfg(4, 2, 0, 1.0, 2.0);
  ProductEinsteinModel p = reference_product(pc);
  p.a = 1.1;
  p.b = 0.95;
  const double F0 = F_value_product(pc, p).F;
  for (double c : {0.5, 1.3, 2.0}) {
    ProductEinsteinModel q = p;
    q.a *= c * c;
    q.b *= c * c;
    CHECK(std::abs(F_value_product(pc, q).F - F0) <= 1e-10 * std::abs(F0));
  }
}

TEST_CASE("product F at the reference and along the counterexample path") {
  const FunctionalConfig cfg = make_cfg(4, 2, 0, 1.0, 1.0);
  const ProductEinsteinModel ref = reference_product(cfg);
  // Main convention lambda = 1 on S^2 x S^2: Schouten eigenvalues all 1.
  CHECK(F_value_product(cfg, ref).F == doctest::Approx(std::pow(6.0, 4)).epsilon(1e-14));
  ProductEinsteinModel at0 = ProductEinsteinModel::counterexample(2, 3.0, 0.0);
  CHECK(F_value_product(cfg, at0).F == F_value_product(cfg, ref).F);
}

TEST_CASE("degenerate configuration under a negative exponent") {
  const FunctionalConfig cfg = make_cfg(5, 4, 3);
  CHECK_THROWS_AS(assemble_F(cfg, 1.0, 0.0), DomainError);
  CHECK_NOTHROW(assemble_F(make_cfg(4, 2, 0), 1.0, 0.0));
}

TEST_CASE("reference metric is critical for F") {
  for (int n : {3, 4}) {
    const auto model = SphereModel::build(n, 1.0, n == 3 ? 12 : 8);
    for (const auto& t : kTuples) {
      if (t[0] != n) continue;
      const FunctionalConfig cfg = make_cfg(n, t[1], t[2]);
      for (const auto& p : harmonic_library(n)) {
        const FirstVariation d = dF_at_reference(cfg, model, p.u);
        INFO(cfg.label() << " " << p.label << " formula " << d.formula << " oracle " << d.oracle);
        CHECK(std::abs(d.formula) <= 1e-7 * d.scale);
        CHECK(std::abs(d.oracle) <= 1e-7 * d.scale);
      }
      const FirstVariation g = dF_at_reference(cfg, model, AmbientQuadratic::constant(n + 1, 1.0));
      CHECK(std::abs(g.formula) <= 1e-12 * g.scale);
    }
  }
}

TEST_CASE("second variation formula on trivial and Obata-equality directions") {
  const auto model = SphereModel::build(3, 1.0, 10);
  const FunctionalConfig cfg = make_cfg(3, 2, 0);
  const auto c = d2F_sphere_conformal(cfg, model, AmbientQuadratic::constant(4, 0.7));
  CHECK(std::abs(c.J_term) < 1e-12);
  CHECK(std::abs(c.total) < 1e-12 * second_variation_scale(make_cfg(3, 2, 0, 1.0, model.quadrature_volume()), 1.0));
  for (const auto& p : harmonic_library(3)) {
    if (p.kind != PerturbationKind::conformal_deg1) continue;
    const auto b = d2F_sphere_conformal(cfg, model, p.u);
    CHECK(std::abs(b.J_term) < 1e-10 * l2_norm2_conformal(model, p.u));
    CHECK(b.I_term == 0.0);
  }
}

TEST_CASE("product Einstein eigenvalue of the split tensor") {
  for (int m : {2, 3, 4}) {
    for (double lam4 : {1.0, 2.0}) {
      ProductEinsteinModel p;
      p.m = m;
      p.lambda = lam4;
      const double L = product_einstein_eigenvalue(p, product_split_tensor(m, 0.3));
      CHECK(std::abs(L - 2.0 * lam4) < 1e-12);
    }
  }
  ProductEinsteinModel p;
  CHECK_THROWS_AS(product_einstein_eigenvalue(p, Eigen::MatrixXd::Identity(4, 4)), PreconditionError);
  const FunctionalConfig cfg = make_cfg(4, 2, 0, 1.0, 1.3);
  const auto b = d2F_product(cfg);
  // lambda_4 = 3, so Lambda = 6 and I = 6 (6 - 2) |hc|^2 Vol.
  CHECK(b.I_term == doctest::Approx(24.0 * 4.0 * 1.3).epsilon(1e-13));
}

TEST_CASE("second variation: formula against Richardson differences") {
  for (int n : {3, 4}) {
    const auto model = SphereModel::build(n, 1.0, n == 3 ? 12 : 8);
    for (const auto& t : kTuples) {
      if (t[0] != n) continue;
      const FunctionalConfig cfg = make_cfg(n, t[1], t[2], 1.0, model.quadrature_volume());
      for (const auto& p : harmonic_library(n)) {
        const double sc = second_variation_scale(cfg, l2_norm2_conformal(model, p.u));
        const auto f = d2F_sphere_conformal(cfg, model, p.u);
        SpherePathEvaluator lin(model, ConformalPath{ConformalPath::Kind::linear, p.u, 0.0});
        const auto s = d2F_numeric([&](double x) { return lin.F_increment(cfg, x); }, sc);
        INFO(cfg.label() << " " << p.label << " formula " << f.total << " numeric " << s.estimate);
        CHECK(std::abs(f.total - s.estimate) <= 1e-4 * std::max(std::abs(f.total), sc));
        // Sign prediction on the strictly stable sphere.
        CHECK(s.estimate <= 1e-8 * sc);
        CHECK(f.J_term >= -1e-7 * sc);
        if (p.kind == PerturbationKind::conformal_deg2) {
          // Exponential path: d^2/dt^2 F(e^{2tu} g) = D^2F(2u g, 2u g).
          SpherePathEvaluator ex(model, ConformalPath{ConformalPath::Kind::exponential, p.u, 0.0});
          const auto e = d2F_numeric([&](double x) { return ex.F_increment(cfg, x); }, 4.0 * sc);
          CHECK(std::abs(4.0 * f.total - e.estimate) <= 1e-4 * std::abs(4.0 * f.total));
        }
      }
    }
  }
}

TEST_CASE("second variation on the product backend") {
  for (int n : {4, 6}) {
    for (int k = 1; k <= n; ++k)
      for (int l = 0; l < k; ++l) {
        const FunctionalConfig cfg = make_cfg(n, k, l, 1.0, 1.3);
        if (2 * l == n || (k == 1 && l != 0)) continue;
        const auto b = d2F_product(cfg);
        ProductEinsteinModel p = reference_product(cfg);
        const double sc = second_variation_scale(cfg, n * cfg.volume);
        const auto s = d2F_numeric(
            [&](double t) {
              ProductEinsteinModel q = p;
              q.a = 1.0 - t;
              q.b = 1.0 + t;
              return F_value_product(cfg, q).F;
            },
            sc);
        INFO(cfg.label() << " formula " << b.total << " numeric " << s.estimate);
        CHECK(std::abs(b.total - s.estimate) <= 1e-6 * std::abs(b.total));
      }
  }
}

TEST_CASE("scaling path has zero second derivative") {
  const auto model = SphereModel::build(3, 1.0, 10);
  const FunctionalConfig cfg = make_cfg(3, 3, 1, 1.0, model.quadrature_volume());
  const double sc = second_variation_scale(cfg, l2_norm2_conformal(model, AmbientQuadratic::constant(4, 1.0)));
  SpherePathEvaluator ev(model, ConformalPath{ConformalPath::Kind::exponential, AmbientQuadratic::constant(4, 1.0), 0.0});
  const auto s = d2F_numeric([&](double t) { return ev.F_increment(cfg, t); }, sc);
  CHECK(std::abs(s.estimate) <= 1e-8 * sc);
}

TEST_CASE("noisy differences raise a step-size error") {
  unsigned state = 12345;
  auto noisy = [&](double t) {
    state = state * 1103515245u + 12345u;
    return t * t + 1e-3 * static_cast<double>(state % 1000) / 1000.0;
  };
  CHECK_THROWS_AS(d2F_numeric(noisy, 1.0), StepSizeError);
  const auto q = d2F_numeric([](double t) { return 3.0 * t * t + std::sin(t); }, 1.0);
  CHECK(q.estimate == doctest::Approx(6.0).epsilon(1e-9));
  CHECK(q.step == 1e-3);
}

TEST_CASE("sign analysis case table") {
  const auto s = sign_analysis(make_cfg(4, 2, 0), sphere_spectral_inputs(4, 1.0));
  CHECK(s.sign == PredictedSign::nonpositive);
  CHECK(s.weitzenbock_consistent);
  CHECK(s.theta_bound == doctest::Approx(-1.0));
  CHECK(s.lambda_E_lower == doctest::Approx(-2.0));
  CHECK(s.k_independent_holds);

  SpectralInputs neg{0.5, -2.5, -3.0};
  const auto e = sign_analysis(make_cfg(4, 4, 3, -1.0), neg);
  CHECK(e.sign == PredictedSign::nonpositive);
  CHECK(e.kmax_condition);
  // K_max <= (n/2) lambda forces the Weitzenboeck bound past -n(n-2) lambda / 2.
  CHECK(-(4 - 2) * neg.k_max >= e.k_independent_bound);
  const auto o = sign_analysis(make_cfg(5, 5, 3, -1.0), SpectralInputs{0.5, -3.0, -3.5});
  CHECK(o.sign == PredictedSign::nonnegative);

  CHECK(sign_analysis(make_cfg(3, 3, 2), sphere_spectral_inputs(3, 1.0)).sign == PredictedSign::none);
  CHECK(sign_analysis(make_cfg(4, 3, 1), SpectralInputs{-0.1, 1.0, 1.0}).sign == PredictedSign::none);
  CHECK(sign_analysis(make_cfg(4, 4, 3, -1.0), SpectralInputs{0.5, -1.5, -3.0}).sign == PredictedSign::none);
  CHECK_THROWS_AS(sign_analysis(make_cfg(4, 2, 2), sphere_spectral_inputs(4, 1.0)), DomainError);
  CHECK_THROWS_AS(sign_analysis(make_cfg(4, 2, 0), SpectralInputs{1.0, 0.0, 1.0}), DomainError);
}

TEST_CASE("Obata gap") {
  const auto model = SphereModel::build(3, 1.0, 10);
  for (const auto& p : harmonic_library(3)) {
    const ObataGap g = obata_gap(model, p.u);
    CHECK(g.gap >= -1e-7 * g.scale);
    if (p.kind == PerturbationKind::conformal_deg1) CHECK(std::abs(g.gap) <= 1e-7 * g.scale);
    if (p.kind == PerturbationKind::conformal_deg2) {
      const double var = g.rhs / 3.0;
      CHECK(std::abs(g.gap - 5.0 * var) <= 1e-6);
    }
  }
  const ObataGap one = obata_gap(model, AmbientQuadratic::constant(4, 1.0));
  CHECK(one.lhs == 0.0);
  CHECK(std::abs(one.rhs) < 1e-20);
}

TEST_CASE("sphere integrals do not depend on the worker count") {
  const auto model = SphereModel::build(4, 1.0, 8);
  const auto lib = harmonic_library(4);
  SpherePathEvaluator ev(model, ConformalPath{ConformalPath::Kind::exponential, lib[6].u, 0.0});
  setenv("SIGMALAB_THREADS", "1", 1);
  const auto a = ev.integrals(0.01);
  setenv("SIGMALAB_THREADS", "3", 1);
  const auto b = ev.integrals(0.01);
  unsetenv("SIGMALAB_THREADS");
  CHECK(a.against_metric == b.against_metric);
  CHECK(a.against_reference == b.against_reference);
}
