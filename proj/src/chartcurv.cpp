#include "sigmalab/chartcurv.hpp"

#include <cmath>
#include <numbers>

#include "sigmalab/errors.hpp"
#include "sigmalab/symalg.hpp"

namespace sigmalab {

ChartMetricJet::ChartMetricJet(JetMatrix components) : g_(std::move(components)) {
  const int n = g_.dim();
  if (n < 2) throw DomainError("ChartMetricJet: dimension must be >= 2");
  const auto& basis = g_(0, 0).basis();
  const int td = g_(0, 0).tdeg();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (g_(i, j).basis() != basis || g_(i, j).tdeg() != td) {
        throw DomainError("ChartMetricJet: components live in different jet spaces");
      }
    }
  double scale = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) scale = std::max(scale, g_(i, j).max_abs());
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      if ((g_(i, j) - g_(j, i)).max_abs() > 1e-13 * std::max(1.0, scale)) {
        throw DomainError("ChartMetricJet: components are not symmetric");
      }
    }
  Eigen::LLT<Eigen::MatrixXd> llt(g_.value());
  if (llt.info() != Eigen::Success) {
    throw GeometryError("ChartMetricJet: base metric is not positive definite");
  }
}

ChartMetricJet ChartMetricJet::euclidean(int n, int xdeg, int tdeg) {
  const auto basis = MonomialBasis::get(n, xdeg);
  JetMatrix g(n, PolyJet(basis, tdeg));
  for (int i = 0; i < n; ++i) g(i, i) = PolyJet::constant(basis, tdeg, 1.0);
  return ChartMetricJet(std::move(g));
}

int ChartMetricJet::xdeg() const {
  int d = g_(0, 0).xdeg();
  for (int i = 0; i < dim(); ++i)
    for (int j = 0; j < dim(); ++j) d = std::min(d, g_(i, j).xdeg());
  return d;
}

ChartMetricJet ChartMetricJet::perturbed(const JetMatrix& h) const {
  const PolyJet t = PolyJet::parameter(basis(), tdeg());
  JetMatrix g = g_;
  for (int i = 0; i < dim(); ++i)
    for (int j = 0; j < dim(); ++j) g(i, j) += t * h(i, j);
  return ChartMetricJet(std::move(g));
}

ChartMetricJet ChartMetricJet::perturbed(const JetMatrix& h, const JetMatrix& m) const {
  const PolyJet t = PolyJet::parameter(basis(), tdeg());
  const PolyJet t2 = t * t;
  JetMatrix g = g_;
  for (int i = 0; i < dim(); ++i)
    for (int j = 0; j < dim(); ++j) g(i, j) += t * h(i, j) + t2 * m(i, j);
  return ChartMetricJet(std::move(g));
}

ChartMetricJet ChartMetricJet::conformal(const PolyJet& phi) const {
  const PolyJet factor = (phi * 2.0).exp();
  JetMatrix g = g_;
  for (int i = 0; i < dim(); ++i)
    for (int j = 0; j < dim(); ++j) g(i, j) = factor * g_(i, j);
  return ChartMetricJet(std::move(g));
}

Tensor3<PolyJet> christoffel_field(const ChartMetricJet& g, const JetMatrix& inverse) {
  const int n = g.dim();
  std::vector<JetMatrix> dg;
  dg.reserve(static_cast<std::size_t>(n));
  for (int c = 0; c < n; ++c) {
    JetMatrix d(n, g.zero());
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        d(i, j) = g(i, j).derivative(c);
        d(j, i) = d(i, j);
      }
    dg.push_back(std::move(d));
  }
  // First-kind symbols G_{lij} = 1/2 (d_i g_jl + d_j g_il - d_l g_ij).
  Tensor3<PolyJet> first(n, g.zero());
  for (int l = 0; l < n; ++l)
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        first(l, i, j) = (dg[i](j, l) + dg[j](i, l) - dg[l](i, j)) * 0.5;
        first(l, j, i) = first(l, i, j);
      }
  Tensor3<PolyJet> gamma(n, g.zero());
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        PolyJet s = inverse(k, 0) * first(0, i, j);
        for (int l = 1; l < n; ++l) s += inverse(k, l) * first(l, i, j);
        gamma(k, i, j) = s;
        gamma(k, j, i) = std::move(s);
      }
  return gamma;
}

CurvaturePoint curvature_at_base(const ChartMetricJet& g) {
  if (g.xdeg() < 2) {
    throw CapabilityError("curvature_at_base: metric jet needs x-degree >= 2");
  }
  const int n = g.dim();
  const JetMatrix inv = neumann_inverse(g.components());
  const Tensor3<PolyJet> gamma = christoffel_field(g, inv);
  const PolyJet zero0 = g.zero().at_origin();

  CurvaturePoint cp;
  cp.dim = n;
  cp.metric = JetMatrix(n, zero0);
  cp.inverse_metric = JetMatrix(n, zero0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      cp.metric(i, j) = g(i, j).at_origin();
      cp.inverse_metric(i, j) = inv(i, j).at_origin();
    }

  cp.christoffel = Tensor3<PolyJet>(n, zero0);
  Tensor4<PolyJet> dgamma(n, zero0);  // (c, a, i, j) -> d_c G^a_ij at the origin
  for (int a = 0; a < n; ++a)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        cp.christoffel(a, i, j) = gamma(a, i, j).at_origin();
        for (int c = 0; c < n; ++c) dgamma(c, a, i, j) = gamma(a, i, j).derivative(c).at_origin();
      }

  const auto& G = cp.christoffel;
  Tensor4<PolyJet> mixed(n, zero0);  // R^a_{bcd}
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d) {
          PolyJet r = dgamma(c, a, d, b) - dgamma(d, a, c, b);
          for (int e = 0; e < n; ++e) r += G(a, c, e) * G(e, d, b) - G(a, d, e) * G(e, c, b);
          mixed(a, b, c, d) = std::move(r);
        }

  cp.riemann = Tensor4<PolyJet>(n, zero0);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d) {
          PolyJet r = cp.metric(a, 0) * mixed(0, b, c, d);
          for (int e = 1; e < n; ++e) r += cp.metric(a, e) * mixed(e, b, c, d);
          cp.riemann(a, b, c, d) = std::move(r);
        }

  cp.ricci = JetMatrix(n, zero0);
  for (int b = 0; b < n; ++b)
    for (int d = 0; d < n; ++d) {
      PolyJet r = zero0;
      for (int a = 0; a < n; ++a)
        for (int c = 0; c < n; ++c) r += cp.inverse_metric(a, c) * cp.riemann(a, b, c, d);
      cp.ricci(b, d) = std::move(r);
    }

  cp.scalar = zero0;
  for (int b = 0; b < n; ++b)
    for (int d = 0; d < n; ++d) cp.scalar += cp.inverse_metric(b, d) * cp.ricci(b, d);

  cp.schouten = JetMatrix(n, zero0);
  const PolyJet factor = cp.scalar * (1.0 / (2.0 * (n - 1)));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) cp.schouten(i, j) = cp.ricci(i, j) - factor * cp.metric(i, j);
  return cp;
}

PolyJet sigma_k_at_base(const CurvaturePoint& c, int k) {
  const int n = c.dim;
  if (k < 0 || k > n) throw DomainError("sigma_k_at_base: k must lie in 0..n");
  const PolyJet zero0 = c.scalar * 0.0;
  if (k == 0) return zero0 + 1.0;
  const JetMatrix mixed = c.inverse_metric * c.schouten;
  return delta_contraction<PolyJet>(n, k, [&](int i, int j) { return mixed(i, j); }, zero0);
}

PolyJet sigma_k_at_base(const ChartMetricJet& g, int k) { return sigma_k_at_base(curvature_at_base(g), k); }

double sigma_k_sampled(const CurvaturePoint& c, int k, double t) {
  const int n = c.dim;
  const Eigen::VectorXd origin = Eigen::VectorXd::Zero(n);
  Eigen::MatrixXd s(n, n);
  Eigen::MatrixXd g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      s(i, j) = c.schouten(i, j).eval(origin, t);
      g(i, j) = c.metric(i, j).eval(origin, t);
    }
  return elem_sym(SymEndo<double>::from_bilinear(s, g).eigenvalues(), k);
}

SphereChart SphereChart::interior(int n, double radius) {
  SphereChart c;
  c.n = n;
  c.radius = radius;
  c.base_angles = Eigen::VectorXd::Constant(n, std::numbers::pi / 2);
  c.rotation = Eigen::MatrixXd::Identity(n + 1, n + 1);
  return c;
}

SphereChart SphereChart::centered_at(const Eigen::VectorXd& p, const Eigen::MatrixXd& rotation) {
  const int n = static_cast<int>(p.size()) - 1;
  if (n < 2 || rotation.rows() != n + 1 || rotation.cols() != n + 1) {
    throw DomainError("SphereChart::centered_at: dimension mismatch");
  }
  SphereChart c;
  c.n = n;
  c.radius = p.norm();
  c.rotation = rotation;
  const Eigen::VectorXd y = rotation.transpose() * p / c.radius;
  c.base_angles.resize(n);
  for (int k = 0; k < n - 1; ++k) {
    const double tail = y.tail(n + 1 - k).norm();
    c.base_angles(k) = std::acos(std::clamp(y(k) / tail, -1.0, 1.0));
    if (std::sin(c.base_angles(k)) < 1e-3) {
      throw GeometryError("SphereChart::centered_at: point lies on a coordinate singularity of this chart");
    }
  }
  c.base_angles(n - 1) = std::atan2(y(n), y(n - 1));
  if (y.tail(2).norm() < 1e-3) {
    throw GeometryError("SphereChart::centered_at: point lies on a coordinate singularity of this chart");
  }
  return c;
}

Eigen::VectorXd SphereChart::base_point() const {
  Eigen::VectorXd x(n + 1);
  double prod = radius;
  for (int k = 0; k < n; ++k) {
    x(k) = prod * std::cos(base_angles(k));
    prod *= std::sin(base_angles(k));
  }
  x(n) = prod;
  return rotation * x;
}

ChartMetricJet SphereChart::metric(int xdeg, int tdeg) const {
  const auto basis = MonomialBasis::get(n, xdeg);
  JetMatrix g(n, PolyJet(basis, tdeg));
  PolyJet prod = PolyJet::constant(basis, tdeg, radius * radius);
  for (int k = 0; k < n; ++k) {
    g(k, k) = prod;
    if (k + 1 < n) {
      const PolyJet s = (PolyJet::coordinate(basis, tdeg, k) + base_angles(k)).sin();
      prod = prod * s * s;
    }
  }
  return ChartMetricJet(std::move(g));
}

std::vector<PolyJet> SphereChart::ambient(const std::shared_ptr<const MonomialBasis>& basis, int tdeg) const {
  if (basis->nvars() != n) throw DomainError("SphereChart::ambient: basis dimension mismatch");
  std::vector<PolyJet> x;
  PolyJet prod = PolyJet::constant(basis, tdeg, radius);
  for (int k = 0; k < n; ++k) {
    const PolyJet theta = PolyJet::coordinate(basis, tdeg, k) + base_angles(k);
    x.push_back(prod * theta.cos());
    prod = prod * theta.sin();
  }
  x.push_back(prod);
  std::vector<PolyJet> p;
  for (int a = 0; a <= n; ++a) {
    PolyJet s(basis, tdeg);
    for (int b = 0; b <= n; ++b) s += x[b] * rotation(a, b);
    p.push_back(std::move(s));
  }
  return p;
}

}  // namespace sigmalab
