#include "doctest.h"

#include <cmath>

#include "sigmalab/errors.hpp"
#include "sigmalab/experiments.hpp"
#include "sigmalab/parallel.hpp"

using namespace sigmalab;

TEST_CASE("counterexample scan is exact at t = 0") {
  const auto rows = counterexample_scan(1.0, 2, {0.0}, {1, 2, 3, 4}, {0, 1, 2, 3});
  CHECK(rows.size() == 10);
  for (const auto& r : rows) {
    CHECK(r.sigma_k_ratio == 1.0);
    CHECK(r.total_sigma_l_ratio == 1.0);
    CHECK_FALSE(r.comparison_violated);
  }
}

TEST_CASE("k = 1 witness on S2 x S2") {
  const auto rows = counterexample_scan(1.0, 2, {0.1}, {1}, {0});
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].sigma_k_ratio == doctest::Approx(1.00125).epsilon(1e-14));
  CHECK(rows[0].volume_ratio == doctest::Approx(1.0073029463611181).epsilon(1e-14));
  CHECK(rows[0].comparison_violated);
  for (const auto& r : counterexample_scan(1.0, 2, default_t_grid(), {1}, {0})) {
    CHECK(std::abs(r.volume_ratio - r.volume_ratio_closed) <= 1e-12 * r.volume_ratio);
    if (r.t != 0.0) {
      CHECK(r.sigma_k_ratio > 1.0);
      CHECK(r.volume_ratio > 1.0);
      CHECK(r.comparison_violated);
    }
  }
  CHECK_THROWS_AS(counterexample_scan(1.0, 1, {0.1}, {1}, {0}), DomainError);
}

TEST_CASE("expansion audit against exact coefficients") {
  // sigma_1 ratio is 1 + t^2/8 exactly on S2 x S2.
  const auto a1 = expansion_coefficient_audit(1.0, 2, 1);
  CHECK(std::abs(a1.fitted - 0.125) < 1e-10);
  CHECK(a1.bracket == doctest::Approx(18.125));
  CHECK_FALSE(a1.agree);
  const double expected[] = {-2.75, -8.625, -17.5};
  const double brackets[] = {36.25, 54.375, 72.5};
  for (int k = 2; k <= 4; ++k) {
    const auto a = expansion_coefficient_audit(1.0, 2, k);
    CHECK(a.fitted == doctest::Approx(expected[k - 2]).epsilon(1e-6));
    CHECK(a.bracket == doctest::Approx(brackets[k - 2]));
    CHECK_FALSE(a.agree);
    CHECK(std::abs(a.coefficients[0] - 1.0) <= 1e-8);
  }
}

TEST_CASE("instability certificate of S^m x S^m") {
  for (int m : {2, 3, 4}) {
    const auto c = instability_certificate(1.0, m);
    CHECK(std::abs(c.eigenvalue - 2.0) < 1e-12);
    CHECK(c.unstable);
  }
  CHECK(std::abs(instability_certificate(2.0, 3).eigenvalue - 4.0) < 1e-12);
  CHECK_THROWS_AS(instability_certificate(1.0, 1), DomainError);
  const Eigen::MatrixXd cg = 0.7 * Eigen::MatrixXd::Identity(4, 4);
  CHECK_THROWS_AS(instability_certificate(1.0, 2, cg), PreconditionError);
}

TEST_CASE("zero perturbation keeps the reference") {
  const auto model = SphereModel::build(3, 1.0, 12);
  FunctionalConfig cfg;
  cfg.n = 3;
  cfg.k = 2;
  cfg.l = 0;
  const auto t = comparison_trial(cfg, model, AmbientQuadratic::zero(4));
  CHECK(t.scale_c == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::abs(t.relative_difference) < 1e-14);
  CHECK(t.verdict == TrialVerdict::ok);
}

TEST_CASE("small degree-1 perturbation") {
  const auto model = SphereModel::build(3, 1.0, 12);
  FunctionalConfig cfg;
  cfg.n = 3;
  cfg.k = 2;
  cfg.l = 0;
  Eigen::VectorXd b = Eigen::VectorXd::Zero(4);
  b(2) = 1e-3;
  const auto t = comparison_trial(cfg, model, AmbientQuadratic::linear(b));
  CHECK(t.verdict == TrialVerdict::ok);
  CHECK(t.refined_min_ratio == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(t.min_sigma_k_ratio >= 1.0 - 1e-9);
  CHECK(t.total_sigma_l_difference <= 0.0);
}

TEST_CASE("sphere comparison trials: no violations") {
  const int tuples[6][3] = {{3, 2, 0}, {3, 2, 1}, {3, 3, 1}, {4, 2, 0}, {4, 2, 1}, {4, 3, 1}};
  for (const auto& tp : tuples) {
    FunctionalConfig cfg;
    cfg.n = tp[0];
    cfg.k = tp[1];
    cfg.l = tp[2];
    ComparisonSettings st;
    if (cfg.n == 4) st.order = 8;
    const auto rows = sphere_comparison_experiment(cfg, st);
    REQUIRE(rows.size() == 100);
    for (const auto& r : rows) {
      INFO(cfg.label() << " trial " << r.index << " " << r.description);
      CHECK(r.verdict == TrialVerdict::ok);
      CHECK(r.min_sigma_k_ratio >= 1.0 - 1e-9);
      CHECK(r.proxy <= st.epsilon * (1.0 + 1e-12));
    }
  }
}

TEST_CASE("comparison experiment preconditions and determinism") {
  FunctionalConfig cfg;
  cfg.n = 3;
  cfg.k = 2;
  cfg.l = 1;
  ComparisonSettings st;
  st.trials = 50;
  CHECK_THROWS_AS(sphere_comparison_experiment(cfg, st), PreconditionError);
  st.trials = 100;
  cfg.lambda = -1.0;
  CHECK_THROWS_AS(sphere_comparison_experiment(cfg, st), PreconditionError);
  cfg.lambda = 1.0;
  cfg.k = 3;
  cfg.l = 2;
  CHECK_THROWS_AS(sphere_comparison_experiment(cfg, st), PreconditionError);
  cfg.k = 2;
  cfg.l = 1;
  const auto a = sphere_comparison_experiment(cfg, st);
  ::setenv("SIGMALAB_THREADS", "1", 1);
  const auto b = sphere_comparison_experiment(cfg, st);
  ::unsetenv("SIGMALAB_THREADS");
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].index == static_cast<int>(i));
    CHECK(a[i].scale_c == b[i].scale_c);
    CHECK(a[i].total_sigma_l_difference == b[i].total_sigma_l_difference);
    CHECK(a[i].description == b[i].description);
  }
  st.seed = 7;
  const auto c = sphere_comparison_experiment(cfg, st);
  CHECK(c[0].scale_c != a[0].scale_c);
}
