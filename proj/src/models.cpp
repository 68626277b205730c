#include "sigmalab/models.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>

#include "sigmalab/errors.hpp"
#include "sigmalab/symalg.hpp"

namespace sigmalab {

GaussRule gauss_gegenbauer(int points, double a) {
  if (points < 1 || a <= -1.0) throw DomainError("gauss_gegenbauer: need points >= 1 and a > -1");
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(points, points);
  for (int k = 1; k < points; ++k) {
    const double s = 2.0 * k + 2.0 * a;
    const double off = std::sqrt(4.0 * k * (k + a) * (k + a) * (k + 2.0 * a) / (s * s * (s + 1.0) * (s - 1.0)));
    J(k, k - 1) = off;
    J(k - 1, k) = off;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  const double mu0 = std::sqrt(std::numbers::pi) * std::tgamma(a + 1.0) / std::tgamma(a + 1.5);
  GaussRule r;
  for (int i = 0; i < points; ++i) {
    r.nodes.push_back(es.eigenvalues()(i));
    const double v = es.eigenvectors()(0, i);
    r.weights.push_back(mu0 * v * v);
  }
  return r;
}

SphereModel SphereModel::build(int n, double lambda, int order) {
  if (n != 3 && n != 4) throw CapabilityError("SphereModel: only n = 3 and n = 4 are supported");
  if (!(lambda > 0.0)) throw DomainError("SphereModel: lambda must be positive");
  if (order < 8) throw DomainError("SphereModel: order must be at least 8");
  SphereModel m;
  m.n_ = n;
  m.order_ = order;
  m.lambda_ = lambda;
  m.radius_ = 1.0 / std::sqrt(lambda);
  const double r = m.radius_;

  // Polar angle i (1-based, i < n) carries the weight sin^{n-i}; in c = cos it is (1-c^2)^{(n-i-1)/2}.
  std::vector<GaussRule> polar;
  for (int i = 1; i < n; ++i) polar.push_back(gauss_gegenbauer(order, 0.5 * (n - i - 1)));
  const int nper = 2 * order;
  const double wper = 2.0 * std::numbers::pi / nper;
  const double rn = std::pow(r, n);

  std::vector<int> idx(static_cast<std::size_t>(n - 1), 0);
  while (true) {
    for (int q = 0; q < nper; ++q) {
      SphereNode nd;
      nd.x.resize(n + 1);
      double prod = r;
      double w = rn * wper;
      for (int i = 0; i < n - 1; ++i) {
        const double c = polar[i].nodes[idx[i]];
        const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
        nd.x(i) = prod * c;
        prod *= s;
        w *= polar[i].weights[idx[i]];
      }
      const double th = wper * (q + 0.5);
      nd.x(n - 1) = prod * std::cos(th);
      nd.x(n) = prod * std::sin(th);
      nd.weight = w;
      Eigen::HouseholderQR<Eigen::MatrixXd> qr(nd.x);
      const Eigen::MatrixXd Qm = qr.householderQ();
      nd.frame = Qm.rightCols(n);
      m.nodes_.push_back(std::move(nd));
    }
    int pos = n - 2;
    while (pos >= 0 && ++idx[pos] == order) idx[pos--] = 0;
    if (pos < 0) break;
  }
  return m;
}

double SphereModel::exact_volume() const {
  const double h = 0.5 * (n_ + 1);
  return 2.0 * std::pow(std::numbers::pi, h) / std::tgamma(h) * std::pow(radius_, n_);
}

double SphereModel::quadrature_volume() const {
  return integrate([](const SphereNode&) { return 1.0; });
}

AmbientQuadratic AmbientQuadratic::zero(int ambient_dim) {
  AmbientQuadratic q;
  q.b = Eigen::VectorXd::Zero(ambient_dim);
  q.Q = Eigen::MatrixXd::Zero(ambient_dim, ambient_dim);
  return q;
}

AmbientQuadratic AmbientQuadratic::constant(int ambient_dim, double value) {
  AmbientQuadratic q = zero(ambient_dim);
  q.c = value;
  return q;
}

AmbientQuadratic AmbientQuadratic::linear(const Eigen::VectorXd& b) {
  AmbientQuadratic q = zero(static_cast<int>(b.size()));
  q.b = b;
  return q;
}

AmbientQuadratic AmbientQuadratic::harmonic_quadratic(const Eigen::MatrixXd& Q) {
  const int d = static_cast<int>(Q.rows());
  AmbientQuadratic q = zero(d);
  q.Q = 0.5 * (Q + Q.transpose());
  q.Q -= (q.Q.trace() / d) * Eigen::MatrixXd::Identity(d, d);
  return q;
}

AmbientQuadratic AmbientQuadratic::operator+(const AmbientQuadratic& o) const {
  AmbientQuadratic r;
  r.c = c + o.c;
  r.b = b + o.b;
  r.Q = Q + o.Q;
  return r;
}

AmbientQuadratic AmbientQuadratic::operator*(double s) const {
  AmbientQuadratic r;
  r.c = c * s;
  r.b = b * s;
  r.Q = Q * s;
  return r;
}

PolyJet AmbientQuadratic::on_chart(const SphereChart& chart, const std::shared_ptr<const MonomialBasis>& basis,
                                   int tdeg) const {
  const auto x = chart.ambient(basis, tdeg);
  PolyJet u = PolyJet::constant(basis, tdeg, c);
  const int d = ambient_dim();
  for (int a = 0; a < d; ++a) {
    if (b(a) != 0.0) u += x[a] * b(a);
    for (int e = 0; e < d; ++e)
      if (Q(a, e) != 0.0) u += x[a] * x[e] * Q(a, e);
  }
  return u;
}

ScalarSample sample(const AmbientQuadratic& U, const SphereNode& node, double radius) {
  ScalarSample s;
  s.u = U.value(node.x);
  const Eigen::VectorXd grad = U.ambient_gradient(node.x);
  s.du = node.frame.transpose() * grad;
  const int n = static_cast<int>(node.frame.cols());
  s.hess = 2.0 * node.frame.transpose() * U.Q * node.frame -
           (grad.dot(node.x) / (radius * radius)) * Eigen::MatrixXd::Identity(n, n);
  return s;
}

const char* to_string(PerturbationKind k) {
  switch (k) {
    case PerturbationKind::conformal_deg1:
      return "conformal_deg1";
    case PerturbationKind::conformal_deg2:
      return "conformal_deg2";
    case PerturbationKind::general_conformal:
      return "general_conformal";
  }
  return "unknown";
}

std::vector<HarmonicPerturbation> harmonic_library(int n) {
  const int d = n + 1;
  std::vector<HarmonicPerturbation> lib;
  Eigen::VectorXd e1 = Eigen::VectorXd::Zero(d);
  e1(0) = 1.0;
  Eigen::VectorXd elast = Eigen::VectorXd::Zero(d);
  elast(d - 1) = 1.0;
  Eigen::VectorXd mixed(d);
  for (int i = 0; i < d; ++i) mixed(i) = 1.0 + 0.5 * i;
  mixed /= mixed.norm();
  lib.push_back({PerturbationKind::conformal_deg1, AmbientQuadratic::linear(e1), "x1"});
  lib.push_back({PerturbationKind::conformal_deg1, AmbientQuadratic::linear(elast), "x_last"});
  lib.push_back({PerturbationKind::conformal_deg1, AmbientQuadratic::linear(mixed), "mixed_linear"});

  Eigen::MatrixXd q1 = Eigen::MatrixXd::Zero(d, d);
  q1(0, 1) = q1(1, 0) = 1.0;
  Eigen::MatrixXd q2 = Eigen::MatrixXd::Zero(d, d);
  q2(0, 0) = 1.0;
  q2(d - 1, d - 1) = -1.0;
  Eigen::MatrixXd q3(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) q3(i, j) = std::cos(1.0 + i + 2.0 * j);
  lib.push_back({PerturbationKind::conformal_deg2, AmbientQuadratic::harmonic_quadratic(q1), "x1x2"});
  lib.push_back({PerturbationKind::conformal_deg2, AmbientQuadratic::harmonic_quadratic(q2), "x1sq_minus_xlastsq"});
  lib.push_back({PerturbationKind::conformal_deg2, AmbientQuadratic::harmonic_quadratic(q3), "dense_quadratic"});

  lib.push_back({PerturbationKind::general_conformal,
                 AmbientQuadratic::linear(mixed) + AmbientQuadratic::harmonic_quadratic(q3) * 0.7, "deg1_plus_deg2"});
  lib.push_back({PerturbationKind::general_conformal,
                 AmbientQuadratic::constant(d, 0.3) + AmbientQuadratic::linear(e1) * 0.5 +
                     AmbientQuadratic::harmonic_quadratic(q1),
                 "const_deg1_deg2"});
  return lib;
}

ConformalSample sample_path(const ConformalPath& p, double t, const SphereNode& node, double radius) {
  const ScalarSample s = sample(p.u, node, radius);
  ConformalSample c;
  if (p.kind == ConformalPath::Kind::exponential) {
    c.phi = p.shift + t * s.u;
    c.dphi = t * s.du;
    c.hess_phi = t * s.hess;
  } else {
    const double w = 1.0 + t * s.u;
    if (!(w > 0.0)) throw GeometryError("sample_path: 1 + t u is not positive");
    c.phi = p.shift + 0.5 * std::log(w);
    c.dphi = (t / (2.0 * w)) * s.du;
    c.hess_phi = (t / (2.0 * w)) * s.hess - (t * t / (2.0 * w * w)) * (s.du * s.du.transpose());
  }
  return c;
}

Eigen::MatrixXd conformal_schouten(const ConformalSample& s, int n, double lambda) {
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  return 0.5 * (n - 2) * lambda * I +
         (n - 2) * (-s.hess_phi + s.dphi * s.dphi.transpose() - 0.5 * s.dphi.squaredNorm() * I);
}

double conformal_sigma_k(const ConformalSample& s, int n, double lambda, int k) {
  if (k == 0) return 1.0;
  const Eigen::MatrixXd S = conformal_schouten(s, n, lambda);
  const Eigen::MatrixXd sym = std::exp(-2.0 * s.phi) * 0.5 * (S + S.transpose());
  return elem_sym(jacobi_eigenvalues(sym), k);
}

double ProductEinsteinModel::factor_lambda() const {
  return convention == EinsteinConvention::ric_eq_lambda_g ? lambda : (dim() - 1) * lambda;
}

ProductEinsteinModel ProductEinsteinModel::counterexample(int m, double lambda, double t, EinsteinConvention c) {
  ProductEinsteinModel p;
  p.m = m;
  p.lambda = lambda;
  p.convention = c;
  const int n = 2 * m;
  p.a = 1.0 / (1.0 + t);
  p.b = 1.0 / (1.0 - t + t * t / n);
  return p;
}

ProductSpectrum product_schouten_spectrum(const ProductEinsteinModel& model) {
  if (!(model.a > 0.0) || !(model.b > 0.0)) throw DomainError("product_schouten_spectrum: scales must be positive");
  if (model.m < 1) throw DomainError("product_schouten_spectrum: factor dimension must be positive");
  const double lf = model.factor_lambda();
  const int n = model.dim();
  ProductSpectrum s;
  const double ra = lf / model.a;
  const double rb = lf / model.b;
  s.scalar = model.m * (ra + rb);
  s.mu_a = ra - s.scalar / (2.0 * (n - 1));
  s.mu_b = rb - s.scalar / (2.0 * (n - 1));
  return s;
}

double sigma_of_product(const ProductEinsteinModel& model, int k) {
  if (k < 0 || k > model.dim()) throw DomainError("sigma_of_product: k must lie in 0..n");
  const ProductSpectrum s = product_schouten_spectrum(model);
  double total = 0.0;
  for (int j = std::max(0, k - model.m); j <= std::min(k, model.m); ++j) {
    total += binomial(model.m, j) * binomial(model.m, k - j) * std::pow(s.mu_a, j) * std::pow(s.mu_b, k - j);
  }
  return total;
}

VolumeRatio product_volume_ratio(int m, double t) {
  if (!(std::abs(t) < 0.5)) throw DomainError("product_volume_ratio: need |t| < 0.5");
  const int n = 2 * m;
  const ProductEinsteinModel p = ProductEinsteinModel::counterexample(m, 1.0, t);
  VolumeRatio v;
  v.closed_form = std::pow(1.0 - (1.0 - 1.0 / n) * t * t + t * t * t / n, -0.25 * n);
  v.exact = std::pow(p.a, 0.5 * m) * std::pow(p.b, 0.5 * m);
  if (std::abs(v.closed_form - v.exact) > 1e-12 * std::abs(v.exact)) {
    throw ConsistencyError("product_volume_ratio: closed form and exact product disagree");
  }
  return v;
}

Tensor4<double> product_riemann(const ProductEinsteinModel& model) {
  if (model.m < 2) throw DomainError("product_riemann: factors of dimension 1 are flat");
  const int m = model.m;
  const int n = model.dim();
  const double kappa = model.factor_lambda() / (m - 1);
  Tensor4<double> R(n, 0.0);
  for (int f = 0; f < 2; ++f) {
    const double kf = kappa / (f == 0 ? model.a : model.b);
    const int o = f * m;
    for (int a = o; a < o + m; ++a)
      for (int b = o; b < o + m; ++b)
        for (int c = o; c < o + m; ++c)
          for (int d = o; d < o + m; ++d)
            R(a, b, c, d) = kf * ((a == c) * (b == d) - (a == d) * (b == c));
  }
  return R;
}

}  // namespace sigmalab
