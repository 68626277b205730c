#include "doctest.h"

#include <Eigen/Eigenvalues>

#include <random>

#include "sigmalab/errors.hpp"
#include "sigmalab/symalg.hpp"

using namespace sigmalab;

TEST_CASE("elem_sym small cases") {
  CHECK(elem_sym(std::vector<double>{1, 1, 1, 1}, 2) == doctest::Approx(6.0));
  CHECK(elem_sym(std::vector<double>{1, 2, 3}, 2) == doctest::Approx(11.0));
  CHECK(elem_sym(std::vector<double>{0.3, -2.0}, 0) == 1.0);
  CHECK_THROWS_AS(elem_sym(std::vector<double>{1, 2}, 3), DomainError);
  CHECK_THROWS_AS(elem_sym(std::vector<double>{1, 2}, -1), DomainError);
}

TEST_CASE("gen_kron_delta signs") {
  CHECK(gen_kron_delta({{1, 2}, {1, 2}}) == 1);
  CHECK(gen_kron_delta({{1, 2}, {2, 1}}) == -1);
  CHECK(gen_kron_delta({{1, 1}, {1, 2}}) == 0);
  CHECK(gen_kron_delta({{1, 2, 3}, {2, 3, 1}}) == 1);
  CHECK(gen_kron_delta({{1, 2, 3}, {1, 2, 4}}) == 0);
}

TEST_CASE("gen_kron_delta antisymmetric under transpositions") {
  const int n = 4;
  for (int a = 1; a <= n; ++a)
    for (int b = 1; b <= n; ++b)
      for (int c = 1; c <= n; ++c)
        for (int d = 1; d <= n; ++d)
          for (int e = 1; e <= n; ++e)
            for (int f = 1; f <= n; ++f) {
              IndexTuple t{{a, b, c}, {d, e, f}};
              IndexTuple su{{b, a, c}, {d, e, f}};
              IndexTuple sl{{a, b, c}, {d, f, e}};
              REQUIRE(gen_kron_delta(su) == -gen_kron_delta(t));
              REQUIRE(gen_kron_delta(sl) == -gen_kron_delta(t));
            }
}

TEST_CASE("sigma via delta matches eigenvalue route") {
  Eigen::Matrix3d d = Eigen::Vector3d(1, 2, 3).asDiagonal();
  CHECK(sigma_via_delta(SymEndo<double>::orthonormal(d), 2) == doctest::Approx(11.0));
  Eigen::Matrix3d half = 0.5 * Eigen::Matrix3d::Identity();
  CHECK(sigma_via_delta(SymEndo<double>::orthonormal(half), 3) == doctest::Approx(0.125));

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + trial % 4;
    Eigen::MatrixXd a(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) a(i, j) = U(rng);
    const Eigen::MatrixXd s = a + a.transpose();
    const auto e = SymEndo<double>::orthonormal(s);
    for (int k = 1; k <= n; ++k) {
      const double v = sigma_via_eigen(e, k);
      REQUIRE(std::abs(sigma_via_delta(e, k) - v) <= 1e-9 * (1 + std::abs(v)));
    }
  }
}

TEST_CASE("delta route refuses large dimensions") {
  Eigen::MatrixXd s = Eigen::MatrixXd::Identity(7, 7);
  CHECK_THROWS_AS(sigma_via_delta(SymEndo<double>::orthonormal(s), 2), CapabilityError);
}

TEST_CASE("jacobi agrees with Eigen's solver") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + trial % 5;
    Eigen::MatrixXd a(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) a(i, j) = U(rng);
    const Eigen::MatrixXd s = a + a.transpose();
    const Eigen::VectorXd mine = jacobi_eigenvalues(s);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ref(s);
    REQUIRE((mine - ref.eigenvalues()).norm() < 1e-11);
  }
}

TEST_CASE("newton identities") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-2.0, 2.0);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 1 + trial % 6;
    std::vector<double> x(n);
    for (auto& v : x) v = U(rng);
    std::vector<double> p(n + 1, 0.0);
    for (int j = 1; j <= n; ++j)
      for (double v : x) p[j] += std::pow(v, j);
    for (int k = 1; k <= n; ++k) {
      double rhs = 0.0;
      double scale = 0.0;
      for (int i = 1; i <= k; ++i) {
        const double term = ((i - 1) % 2 ? -1.0 : 1.0) * elem_sym(x, k - i) * p[i];
        rhs += term;
        scale += std::abs(term);
      }
      REQUIRE(std::abs(k * elem_sym(x, k) - rhs) <= 1e-10 * (1 + scale));
    }
  }
}

TEST_CASE("generalized metric route") {
  Eigen::Matrix3d g;
  g << 2, 0.3, 0, 0.3, 1, 0.1, 0, 0.1, 1.5;
  Eigen::Matrix3d s;
  s << 1, 0.2, 0.4, 0.2, -1, 0.5, 0.4, 0.5, 0.7;
  const auto e = SymEndo<double>::from_bilinear(s, g);
  Eigen::EigenSolver<Eigen::Matrix3d> es(g.inverse() * s);
  std::vector<double> ev;
  for (int i = 0; i < 3; ++i) ev.push_back(es.eigenvalues()(i).real());
  for (int k = 1; k <= 3; ++k) {
    CHECK(sigma_via_eigen(e, k) == doctest::Approx(elem_sym(ev, k)).epsilon(1e-12));
    CHECK(sigma_via_delta(e, k) == doctest::Approx(elem_sym(ev, k)).epsilon(1e-12));
  }
}

TEST_CASE("contraction rule") {
  CHECK(contraction_rule_check(1, 2, 3));
  CHECK(contraction_rule_check(2, 3, 4));
  CHECK_THROWS_AS(contraction_rule_check(1, 1, 3), DomainError);
  for (int n = 2; n <= 4; ++n)
    for (int k = 2; k <= n; ++k)
      for (int p = 1; p < k; ++p) CHECK(contraction_rule_check(p, k, n));
}
