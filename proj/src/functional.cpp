#include "sigmalab/functional.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "sigmalab/errors.hpp"
#include "sigmalab/parallel.hpp"
#include "sigmalab/symalg.hpp"
#include "sigmalab/varform.hpp"

namespace sigmalab {

namespace {

using SmallMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 6, 6>;

// sigma_0..sigma_n of a symmetric matrix from power sums (Newton).
void elem_sym_all(const SmallMat& A, double* e) {
  const int n = static_cast<int>(A.rows());
  double p[7];
  SmallMat P = A;
  for (int i = 1; i <= n; ++i) {
    p[i] = P.trace();
    if (i < n) P = P * A;
  }
  e[0] = 1.0;
  for (int j = 1; j <= n; ++j) {
    double s = 0.0;
    for (int i = 1; i <= j; ++i) s += ((i % 2) ? 1.0 : -1.0) * e[j - i] * p[i];
    e[j] = s / j;
  }
}

double ipow(double x, int e) { return std::pow(x, static_cast<double>(e)); }

double sigma_round(int n, double lambda, int j) { return ipow(0.5 * (n - 2) * lambda, j) * binomial(n, j); }

FunctionalConfig on_model(FunctionalConfig cfg, const SphereModel& model) {
  if (cfg.n != model.dim()) throw PreconditionError("functional: config dimension differs from the sphere model");
  if (std::abs(cfg.lambda - model.lambda()) > 1e-14 * std::abs(model.lambda()))
    throw PreconditionError("functional: config lambda differs from the sphere model");
  cfg.volume = model.quadrature_volume();
  cfg.validate();
  return cfg;
}

constexpr std::size_t kBlock = 1024;

}  // namespace

const char* to_string(BetaVariant v) { return v == BetaVariant::n_minus_2l ? "n-2l" : "2n-l"; }

BetaVariant parse_beta_variant(const std::string& s) {
  if (s == "n-2l" || s == "n_minus_2l") return BetaVariant::n_minus_2l;
  if (s == "2n-l" || s == "2n_minus_l") return BetaVariant::two_n_minus_l;
  throw DomainError("unknown beta variant '" + s + "' (expected n-2l or 2n-l)");
}

void FunctionalConfig::validate() const {
  if (n < 3) throw DomainError("functional: n must be at least 3");
  if (k < 1 || k > n) throw DomainError("functional: k must lie in 1..n");
  if (l < 0 || l >= k) throw DomainError("functional: need 0 <= l < k");
  if (2 * l == n) throw DomainError("functional: l = n/2 is excluded (F does not depend on sigma_k)");
  if (k == 1 && l != 0) throw DomainError("functional: k = 1 requires l = 0");
  if (!(lambda != 0.0) || !std::isfinite(lambda)) throw DomainError("functional: lambda must be finite and nonzero");
  if (!(volume > 0.0) || !std::isfinite(volume)) throw DomainError("functional: volume must be positive");
}

std::string FunctionalConfig::label() const {
  std::ostringstream os;
  os << "n=" << n << ",k=" << k << ",l=" << l;
  return os.str();
}

namespace {

Coefficients general_coefficients(const FunctionalConfig& cfg) {
  const int n = cfg.n, k = cfg.k, l = cfg.l;
  Coefficients c;
  const double q = (l == 0) ? n : n - 2.0 * l * (k - l) / (k - 1);
  if (!(q != 0.0)) throw DomainError("coefficients: n - 2l(k-l)/(k-1) vanishes");
  c.alpha = q / ((n - 1.0) * (n - 2.0));
  c.mu = n * (n - 2.0) * (n - 2.0) / (2.0 * q);
  const double lead = cfg.beta_variant == BetaVariant::n_minus_2l ? n - 2.0 * l : 2.0 * n - l;
  c.beta = (n - 2.0) * lead * (n + 2.0 * k - 2.0 * l) / (2.0 * n * n);
  c.a_coeff = -0.5 * ipow(0.5 * (n - 2), n * k - 1) * binomial(n - 1, k - 1) * ipow(binomial(n, k), n - 2 * l - 1) *
              ipow(binomial(n, l), 2 * k) * ipow(cfg.volume, n + 2 * k - 2 * l - 1);
  return c;
}

}  // namespace

Coefficients coefficients(const FunctionalConfig& cfg) {
  cfg.validate();
  if (cfg.k >= 2) return general_coefficients(cfg);
  const int n = cfg.n;
  Coefficients c;
  c.k1_route = true;
  c.alpha = -cfg.lambda;
  c.beta = (n - 1.0) * (n + 2.0) / (static_cast<double>(n) * n);
  c.mu = std::numeric_limits<double>::quiet_NaN();
  c.a_coeff = -ipow(n, n) * (n - 2.0) / (4.0 * (n - 1.0)) * ipow(0.5 * (n - 2), n - 1) * ipow(cfg.volume, n + 1);
  return c;
}

Coefficients coefficients_general_l0(const FunctionalConfig& cfg) {
  cfg.validate();
  if (cfg.l != 0) throw DomainError("coefficients_general_l0: needs l = 0");
  return general_coefficients(cfg);
}

FunctionalValue assemble_F(const FunctionalConfig& cfg, double int_sigma_l, double int_sigma_k) {
  FunctionalValue v;
  v.int_sigma_l = int_sigma_l;
  v.int_sigma_k = int_sigma_k;
  const int e2 = cfg.n - 2 * cfg.l;
  const double tiny = 1e-300;
  if (e2 < 0 && std::abs(int_sigma_k) < tiny)
    throw DomainError("F: int sigma_k vanishes under a negative exponent (degenerate configuration)");
  v.F = ipow(int_sigma_l, 2 * cfg.k) * ipow(int_sigma_k, e2);
  return v;
}

SpherePathEvaluator::SpherePathEvaluator(const SphereModel& model, ConformalPath path)
    : model_(&model), path_(std::move(path)) {
  samples_.reserve(model.nodes().size());
  for (const auto& nd : model.nodes()) samples_.push_back(sample(path_.u, nd, model.radius()));
}

SigmaIntegrals SpherePathEvaluator::integrals(double t) const {
  const int n = model_->dim();
  const double lam = model_->lambda();
  const double s0 = 0.5 * (n - 2) * lam;
  const auto& nodes = model_->nodes();
  const std::size_t blocks = (nodes.size() + kBlock - 1) / kBlock;
  const bool linear = path_.kind == ConformalPath::Kind::linear;
  double sig0[7], bin[7][7];
  for (int j = 0; j <= n; ++j) {
    sig0[j] = sigma_round(n, lam, j);
    for (int i = 0; i <= j; ++i) bin[j][i] = binomial(n - i, j - i);
  }
  // Per node: A = S_{e^{2 phi} g} in the background frame = s0 I + E, and
  // sigma_j(e^{2 phi} g) = e^{-2 j phi} sigma_j(A) with
  // sigma_j(s0 I + E) - sigma_j(s0 I) = sum_{i >= 1} C(n-i, j-i) s0^{j-i} sigma_i(E).
  auto partial = parallel_map<std::vector<double>>(blocks, [&](std::size_t b) {
    std::vector<CompensatedSum> acc(2 * (n + 1));
    double es[7];
    const std::size_t end = std::min(nodes.size(), (b + 1) * kBlock);
    for (std::size_t i = b * kBlock; i < end; ++i) {
      const ScalarSample& s = samples_[i];
      double phi;
      SmallMat H(n, n);
      Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 6, 1> dphi(n);
      if (!linear) {
        phi = path_.shift + t * s.u;
        dphi = t * s.du;
        H = t * s.hess;
      } else {
        const double tu = t * s.u;
        if (!(tu > -1.0)) throw GeometryError("SpherePathEvaluator: 1 + t u is not positive");
        const double w = 1.0 + tu;
        phi = path_.shift + 0.5 * std::log1p(tu);
        dphi = (t / (2.0 * w)) * s.du;
        H = (t / (2.0 * w)) * s.hess - (t * t / (2.0 * w * w)) * (s.du * s.du.transpose());
      }
      SmallMat E = (n - 2) * (-H + dphi * dphi.transpose());
      E.diagonal().array() -= 0.5 * (n - 2) * dphi.squaredNorm();
      E = (0.5 * (E + E.transpose())).eval();
      elem_sym_all(E, es);
      const double w = nodes[i].weight;
      for (int j = 0; j <= n; ++j) {
        double dA = 0.0;
        for (int q = 1; q <= j; ++q) dA += bin[j][q] * ipow(s0, j - q) * es[q];
        const double em = (n - 2 * j) * phi, er = -2.0 * j * phi;
        acc[j].add((sig0[j] * std::expm1(em) + std::exp(em) * dA) * w);
        acc[n + 1 + j].add((sig0[j] * std::expm1(er) + std::exp(er) * dA) * w);
      }
    }
    std::vector<double> out(acc.size());
    for (std::size_t j = 0; j < acc.size(); ++j) out[j] = acc[j].value();
    return out;
  });
  SigmaIntegrals r;
  std::vector<CompensatedSum> tot(2 * (n + 1));
  for (const auto& p : partial)
    for (std::size_t j = 0; j < p.size(); ++j) tot[j].add(p[j]);
  const double vol = model_->quadrature_volume();
  for (int j = 0; j <= n; ++j) {
    r.metric_increment.push_back(tot[j].value());
    r.reference_increment.push_back(tot[n + 1 + j].value());
    r.against_metric.push_back(sig0[j] * vol + r.metric_increment.back());
    r.against_reference.push_back(sig0[j] * vol + r.reference_increment.back());
  }
  return r;
}

FunctionalValue SpherePathEvaluator::F(const FunctionalConfig& cfg, double t) const {
  if (cfg.n != model_->dim()) throw PreconditionError("SpherePathEvaluator: dimension mismatch");
  cfg.validate();
  const SigmaIntegrals s = integrals(t);
  return assemble_F(cfg, s.against_metric[cfg.l], s.against_reference[cfg.k]);
}

double SpherePathEvaluator::F_increment(const FunctionalConfig& cfg, double t) const {
  if (cfg.n != model_->dim()) throw PreconditionError("SpherePathEvaluator: dimension mismatch");
  cfg.validate();
  const SigmaIntegrals s = integrals(t);
  const double vol = model_->quadrature_volume();
  const double A0 = sigma_round(cfg.n, model_->lambda(), cfg.l) * vol;
  const double B0 = sigma_round(cfg.n, model_->lambda(), cfg.k) * vol;
  const double F0 = assemble_F(cfg, A0, B0).F;
  const double x = s.metric_increment[cfg.l] / A0, y = s.reference_increment[cfg.k] / B0;
  if (!(x > -1.0) || !(y > -1.0)) return assemble_F(cfg, s.against_metric[cfg.l], s.against_reference[cfg.k]).F - F0;
  return F0 * std::expm1(2.0 * cfg.k * std::log1p(x) + (cfg.n - 2.0 * cfg.l) * std::log1p(y));
}

ProductEinsteinModel reference_product(const FunctionalConfig& cfg) {
  if (cfg.n % 2 != 0) throw DomainError("reference_product: n must be even");
  ProductEinsteinModel p;
  p.m = cfg.n / 2;
  p.lambda = cfg.lambda;
  p.convention = EinsteinConvention::ric_eq_nm1_lambda_g;
  return p;
}

FunctionalValue F_value_product(const FunctionalConfig& cfg, const ProductEinsteinModel& model) {
  cfg.validate();
  if (model.dim() != cfg.n) throw PreconditionError("F_value_product: dimension mismatch");
  const double ratio = std::pow(model.a * model.b, 0.5 * model.m);
  return assemble_F(cfg, sigma_of_product(model, cfg.l) * cfg.volume * ratio,
                    sigma_of_product(model, cfg.k) * cfg.volume);
}

double second_variation_scale(const FunctionalConfig& cfg, double h_norm2_integral) {
  const Coefficients c = coefficients(cfg);
  return std::abs(c.a_coeff) * ipow(std::abs(cfg.lambda), cfg.n * cfg.k - 1) * h_norm2_integral;
}

FirstVariation dF_at_reference(const FunctionalConfig& cfg_in, const SphereModel& model, const AmbientQuadratic& u,
                               double step) {
  const FunctionalConfig cfg = on_model(cfg_in, model);
  const int n = cfg.n, k = cfg.k, l = cfg.l;
  const double vol = cfg.volume;
  const auto& nodes = model.nodes();
  // Pointwise first variations of sigma_l, sigma_k, the trace and |u|^2.
  auto partial = parallel_map<std::array<double, 4>>(nodes.size(), [&](std::size_t i) {
    const PerturbationFields f = fields_conformal_node(model, nodes[i], u);
    const double w = nodes[i].weight;
    return std::array<double, 4>{dsigma_k_first_einstein(f, l) * w, dsigma_k_first_einstein(f, k) * w,
                                 f.trace() * w, f.norm2() * w};
  });
  CompensatedSum Pl, Pk, T, N;
  for (const auto& p : partial) {
    Pl.add(p[0]);
    Pk.add(p[1]);
    T.add(p[2]);
    N.add(p[3]);
  }
  const double sl = sigma_round(n, cfg.lambda, l), sk = sigma_round(n, cfg.lambda, k);
  const double A = sl * vol, B = sk * vol;
  FirstVariation r;
  r.formula = 2.0 * k * ipow(A, 2 * k - 1) * ipow(B, n - 2 * l) * (Pl.value() + 0.5 * sl * T.value()) +
              (n - 2 * l) * ipow(A, 2 * k) * ipow(B, n - 2 * l - 1) * Pk.value();

  SpherePathEvaluator ev(model, ConformalPath{ConformalPath::Kind::linear, u, 0.0});
  auto central = [&](double s) { return (ev.F_increment(cfg, s) - ev.F_increment(cfg, -s)) / (2.0 * s); };
  r.oracle = (4.0 * central(0.5 * step) - central(step)) / 3.0;
  const Coefficients c = coefficients(cfg);
  r.scale = std::abs(c.a_coeff) * ipow(std::abs(cfg.lambda), n * k - 1) * std::sqrt(vol) * std::sqrt(N.value());
  return r;
}

SecondVariationBreakdown d2F_formula(const FunctionalConfig& cfg, const TraceFreeEigen& hc, double J_term) {
  const Coefficients c = coefficients(cfg);
  SecondVariationBreakdown b;
  b.alpha = c.alpha;
  b.beta = c.beta;
  b.mu = c.mu;
  b.a_coeff = c.a_coeff;
  b.k1_route = c.k1_route;
  const double L = hc.einstein_eigenvalue;
  if (hc.norm2_integral == 0.0)
    b.I_term = 0.0;
  else if (c.k1_route)
    b.I_term = L * hc.norm2_integral;
  else
    b.I_term = L * ((cfg.k - 1) * L - c.mu * cfg.lambda) * hc.norm2_integral;
  b.J_term = J_term;
  b.total = c.a_coeff * ipow(cfg.lambda, cfg.n * cfg.k - 1) * (c.alpha / cfg.lambda * b.I_term + c.beta * J_term);
  return b;
}

SecondVariationBreakdown d2F_sphere_conformal(const FunctionalConfig& cfg_in, const SphereModel& model,
                                              const AmbientQuadratic& u) {
  const FunctionalConfig cfg = on_model(cfg_in, model);
  const int n = cfg.n;
  const double r = model.radius();
  const double vol = cfg.volume;
  const double mean = model.integrate([&](const SphereNode& nd) { return u.value(nd.x); }) / vol;
  // tr h = n u.
  const double J = static_cast<double>(n) * n * model.integrate([&](const SphereNode& nd) {
    const ScalarSample s = sample(u, nd, r);
    return s.du.squaredNorm() - n * cfg.lambda * (s.u - mean) * (s.u - mean);
  });
  return d2F_formula(cfg, TraceFreeEigen{}, J);
}

Eigen::MatrixXd product_split_tensor(int m, double amplitude) {
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(2 * m, 2 * m);
  for (int i = 0; i < m; ++i) {
    h(i, i) = -amplitude;
    h(m + i, m + i) = amplitude;
  }
  return h;
}

double product_einstein_eigenvalue(const ProductEinsteinModel& model, const Eigen::MatrixXd& hc) {
  const int n = model.dim();
  if (hc.rows() != n || hc.cols() != n) throw DomainError("product_einstein_eigenvalue: size mismatch");
  const double nrm = hc.norm();
  if (!(nrm > 0.0)) throw PreconditionError("product_einstein_eigenvalue: zero tensor");
  if (std::abs(hc.trace()) > 1e-12 * nrm) throw PreconditionError("product_einstein_eigenvalue: tensor is not trace-free");
  const Tensor4<double> R = product_riemann(model);
  // Parallel tensor: Delta hc = 0, so Delta_E hc = 2 Rm(hc).
  Eigen::MatrixXd E = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) s += R(i, a, j, b) * hc(a, b);
      E(i, j) = 2.0 * s;
    }
  const double L = (E.array() * hc.array()).sum() / hc.squaredNorm();
  if ((E - L * hc).norm() > 1e-12 * std::max(1.0, std::abs(L)) * nrm)
    throw ConsistencyError("product_einstein_eigenvalue: tensor is not an eigentensor of Delta_E");
  return L;
}

SecondVariationBreakdown d2F_product(const FunctionalConfig& cfg, double amplitude) {
  cfg.validate();
  const ProductEinsteinModel model = reference_product(cfg);
  const Eigen::MatrixXd hc = product_split_tensor(model.m, amplitude);
  TraceFreeEigen t;
  t.einstein_eigenvalue = product_einstein_eigenvalue(model, hc);
  t.norm2_integral = hc.squaredNorm() * cfg.volume;
  return d2F_formula(cfg, t, 0.0);
}

SecondDifference d2F_numeric(const std::function<double(double)>& f, double scale, double t0, double agree,
                             int max_retries) {
  const double f0 = f(0.0);
  auto D = [&](double h) { return (f(h) - 2.0 * f0 + f(-h)) / (h * h); };
  std::ostringstream diag;
  diag.precision(17);
  double step = t0;
  for (int attempt = 0; attempt <= max_retries; ++attempt, step *= 0.5) {
    SecondDifference r;
    r.step = step;
    r.coarse = D(step);
    r.fine = D(0.5 * step);
    r.estimate = (4.0 * r.fine - r.coarse) / 3.0;
    const double ref = std::max(std::abs(r.estimate), scale);
    if (std::abs(r.coarse - r.fine) <= agree * ref) return r;
    diag << " [t0 " << step << ": " << r.coarse << " vs " << r.fine << ", reference " << ref << "]";
  }
  throw StepSizeError("d2F_numeric: coarse and fine differences disagree at every step:" + diag.str());
}

SpectralInputs sphere_spectral_inputs(int n, double lambda) {
  if (n < 2) throw DomainError("sphere_spectral_inputs: n must be at least 2");
  if (!(lambda > 0.0)) throw DomainError("sphere_spectral_inputs: lambda must be positive");
  return SpectralInputs{2.0 * (n + 1) * lambda, lambda, lambda};
}

const char* to_string(PredictedSign s) {
  switch (s) {
    case PredictedSign::nonpositive: return "<=0";
    case PredictedSign::nonnegative: return ">=0";
    case PredictedSign::none: return "no prediction";
  }
  return "?";
}

SignAnalysis sign_analysis(const FunctionalConfig& cfg, const SpectralInputs& in) {
  cfg.validate();
  if (in.k_min > in.k_max) throw DomainError("sign_analysis: K_min exceeds K_max");
  const int n = cfg.n;
  const double lam = cfg.lambda;
  const Coefficients c = coefficients(cfg);
  SignAnalysis s;
  s.alpha = c.alpha;
  s.beta = c.beta;
  s.scalar = n * (n - 1.0) * lam;
  s.theta_bound = std::min((n - 2.0) * in.k_max - s.scalar / n, s.scalar / n - n * in.k_min);
  s.lambda_E_lower = -s.theta_bound - (n - 1.0) * lam;
  s.weitzenbock_consistent = in.lambda_E >= s.lambda_E_lower - 1e-12 * (1.0 + std::abs(s.lambda_E_lower));
  s.kmax_condition = in.k_max <= 0.5 * n * lam;
  s.k_independent_bound = -0.5 * n * (n - 2.0) * lam;
  s.k_independent_holds = in.lambda_E >= s.k_independent_bound;
  s.strictly_stable = in.lambda_E > 0.0;
  if (!s.strictly_stable) {
    s.reason = "not strictly stable";
  } else if (lam > 0.0 && 2 * cfg.l < n) {
    s.sign = PredictedSign::nonpositive;
    s.reason = "lambda > 0, l < n/2";
  } else if (lam < 0.0 && in.k_max < 0.5 * n * lam && 2 * cfg.l > n) {
    const bool even = (n * cfg.k) % 2 == 0;
    s.sign = even ? PredictedSign::nonpositive : PredictedSign::nonnegative;
    s.reason = even ? "lambda < 0, K < n lambda/2, l > n/2, nk even" : "lambda < 0, K < n lambda/2, l > n/2, nk odd";
  } else {
    s.reason = "case not covered";
  }
  return s;
}

ObataGap obata_gap(const SphereModel& model, const AmbientQuadratic& u) {
  const int n = model.dim();
  const double lam = model.lambda();
  const double r = model.radius();
  const double vol = model.quadrature_volume();
  const double mean = model.integrate([&](const SphereNode& nd) { return u.value(nd.x); }) / vol;
  ObataGap g;
  g.lhs = model.integrate([&](const SphereNode& nd) { return sample(u, nd, r).du.squaredNorm(); });
  g.rhs = n * lam * model.integrate([&](const SphereNode& nd) {
    const double d = u.value(nd.x) - mean;
    return d * d;
  });
  g.gap = g.lhs - g.rhs;
  g.scale = g.lhs + g.rhs + n * std::abs(lam) * model.integrate([&](const SphereNode& nd) {
    const double v = u.value(nd.x);
    return v * v;
  });
  return g;
}

}  // namespace sigmalab
