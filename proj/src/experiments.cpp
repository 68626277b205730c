#include "sigmalab/experiments.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <random>

#include "sigmalab/errors.hpp"
#include "sigmalab/parallel.hpp"
#include "sigmalab/polyjet.hpp"
#include "sigmalab/symalg.hpp"

namespace sigmalab {

namespace {

double sigma_round(int n, double lambda, int j) { return std::pow(0.5 * (n - 2) * lambda, j) * binomial(n, j); }

SphereNode node_at(const Eigen::VectorXd& x) {
  const int n = static_cast<int>(x.size()) - 1;
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(x);
  const Eigen::MatrixXd Q = qr.householderQ();
  return SphereNode{x, Q.rightCols(n), 0.0};
}

double sigma_k_of(const AmbientQuadratic& phi, const SphereNode& nd, double radius, int n, double lambda, int k) {
  const ScalarSample s = sample(phi, nd, radius);
  return conformal_sigma_k(ConformalSample{s.u, s.du, s.hess}, n, lambda, k);
}

// Compass search for the minimum of sigma_k(e^{2 phi} g) near x0.
std::pair<double, Eigen::VectorXd> refine_minimum(const AmbientQuadratic& phi, Eigen::VectorXd x, double radius, int n,
                                                  double lambda, int k) {
  double best = sigma_k_of(phi, node_at(x), radius, n, lambda, k);
  double h = 0.2;
  while (h > 1e-7) {
    bool moved = false;
    const Eigen::MatrixXd frame = node_at(x).frame;
    for (int i = 0; i < n && !moved; ++i) {
      for (double sgn : {1.0, -1.0}) {
        Eigen::VectorXd y = std::cos(h) * x + std::sin(h) * radius * sgn * frame.col(i);
        y *= radius / y.norm();
        const double v = sigma_k_of(phi, node_at(y), radius, n, lambda, k);
        if (v < best) {
          best = v;
          x = y;
          moved = true;
          break;
        }
      }
    }
    if (!moved) h *= 0.5;
  }
  return {best, x};
}

}  // namespace

std::vector<double> default_t_grid() {
  return {-0.2, -0.1, -0.05, -0.02, -0.01, 0.0, 0.01, 0.02, 0.05, 0.1, 0.2};
}

std::vector<CounterexampleRow> counterexample_scan(double lambda, int m, const std::vector<double>& t_grid,
                                                   const std::vector<int>& k_range, const std::vector<int>& l_range) {
  if (m < 2) throw DomainError("counterexample_scan: factor dimension must be at least 2");
  const int n = 2 * m;
  const ProductEinsteinModel ref = ProductEinsteinModel::counterexample(m, lambda, 0.0);
  std::vector<CounterexampleRow> rows;
  for (double t : t_grid) {
    const ProductEinsteinModel gt = ProductEinsteinModel::counterexample(m, lambda, t);
    const VolumeRatio vr = product_volume_ratio(m, t);
    for (int k : k_range) {
      if (k < 1 || k > n) throw DomainError("counterexample_scan: k outside 1..n");
      for (int l : l_range) {
        if (l < 0 || l >= k) continue;
        CounterexampleRow r;
        r.t = t;
        r.k = k;
        r.l = l;
        r.sigma_k_ratio = sigma_of_product(gt, k) / sigma_of_product(ref, k);
        r.total_sigma_l_ratio = sigma_of_product(gt, l) * vr.exact / sigma_of_product(ref, l);
        r.volume_ratio = vr.exact;
        r.volume_ratio_closed = vr.closed_form;
        r.constraint_holds = r.sigma_k_ratio >= 1.0;
        r.comparison_violated = r.constraint_holds && r.total_sigma_l_ratio > 1.0;
        rows.push_back(r);
      }
    }
  }
  return rows;
}

double expansion_bracket(int n, int k) {
  const double q = (n - 2.0) / (2.0 * (n - 1.0));
  return (k * k / 4.0 + k + 3.0 * k * (n - k) / (4.0 * (n - 1.0))) / (q * q) + k / (2.0 * n);
}

ExpansionAudit expansion_coefficient_audit(double lambda, int m, int k) {
  const int n = 2 * m;
  if (m < 2) throw DomainError("expansion_coefficient_audit: factor dimension must be at least 2");
  if (k < 1 || k > n) throw DomainError("expansion_coefficient_audit: k outside 1..n");
  const ProductEinsteinModel ref = ProductEinsteinModel::counterexample(m, lambda, 0.0);
  const double s0 = sigma_of_product(ref, k);
  const std::vector<double> ts = {-0.02, -0.01, -0.005, 0.0, 0.005, 0.01, 0.02};
  const double unit = 0.02;
  Eigen::MatrixXd A(ts.size(), 5);
  Eigen::VectorXd y(ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double s = ts[i] / unit;
    for (int p = 0; p < 5; ++p) A(i, p) = std::pow(s, p);
    y(i) = sigma_of_product(ProductEinsteinModel::counterexample(m, lambda, ts[i]), k) / s0;
  }
  const Eigen::VectorXd c = A.colPivHouseholderQr().solve(y);
  ExpansionAudit out;
  out.k = k;
  out.fit_residual = (A * c - y).cwiseAbs().maxCoeff();
  if (out.fit_residual > 1e-8) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "expansion_coefficient_audit: fit residual %.3e above 1e-8", out.fit_residual);
    throw GridError(buf);
  }
  for (int p = 0; p < 5; ++p) out.coefficients.push_back(c(p) / std::pow(unit, p));
  out.fitted = out.coefficients[2];
  out.bracket = expansion_bracket(n, k);
  out.agree = std::abs(out.fitted - out.bracket) <= 1e-6 * std::max(1.0, std::abs(out.bracket));
  return out;
}

InstabilityCertificate instability_certificate(double lambda, int m, const std::optional<Eigen::MatrixXd>& hc) {
  if (m < 2) throw DomainError("instability_certificate: needs m >= 2 (a circle factor has no curvature scale)");
  ProductEinsteinModel p;
  p.m = m;
  p.lambda = lambda;
  p.convention = EinsteinConvention::ric_eq_lambda_g;
  InstabilityCertificate c;
  c.eigenvalue = product_einstein_eigenvalue(p, hc ? *hc : product_split_tensor(m));
  c.closed_form = 2.0 * lambda;
  c.unstable = c.eigenvalue > 0.0;
  return c;
}

const char* to_string(TrialVerdict v) {
  switch (v) {
    case TrialVerdict::ok: return "ok";
    case TrialVerdict::violation: return "violation";
    case TrialVerdict::skipped: return "skipped";
  }
  return "?";
}

double c2_proxy(const SphereModel& model, const AmbientQuadratic& phi) {
  double best = 0.0;
  for (const auto& nd : model.nodes()) {
    const ScalarSample s = sample(phi, nd, model.radius());
    best = std::max(best, std::abs(s.u) + s.du.norm() + s.hess.norm());
  }
  return best;
}

ComparisonTrial comparison_trial(const FunctionalConfig& cfg, const SphereModel& model, const AmbientQuadratic& phi,
                                 double tolerance) {
  const int n = cfg.n, k = cfg.k, l = cfg.l;
  const double lam = model.lambda();
  const double r = model.radius();
  ComparisonTrial t;
  t.proxy = c2_proxy(model, phi);
  const double sk0 = sigma_round(n, lam, k);
  double node_min = std::numeric_limits<double>::infinity();
  const SphereNode* arg = nullptr;
  for (const auto& nd : model.nodes()) {
    const double v = sigma_k_of(phi, nd, r, n, lam, k);
    if (v < node_min) {
      node_min = v;
      arg = &nd;
    }
  }
  const double refined = std::min(node_min, refine_minimum(phi, arg->x, r, n, lam, k).first);
  if (!(refined > 0.0)) {
    t.verdict = TrialVerdict::skipped;
    t.reason = "sigma_k is not positive somewhere";
    return t;
  }
  // sigma_k(c^2 g) = c^{-2k} sigma_k(g): the refined minimum binds.
  t.scale_c = std::pow(refined / sk0, 1.0 / (2.0 * k));
  const double shrink = std::pow(t.scale_c, -2.0 * k);
  t.min_sigma_k_ratio = node_min * shrink / sk0;
  t.refined_min_ratio = refined * shrink / sk0;

  const SpherePathEvaluator ev(model, ConformalPath{ConformalPath::Kind::exponential, phi, 0.0});
  const SigmaIntegrals s = ev.integrals(1.0);
  const double ref = sigma_round(n, lam, l) * model.quadrature_volume();
  const double total = std::pow(t.scale_c, n - 2 * l) * s.against_metric[l];
  t.total_sigma_l_difference = total - ref;
  t.relative_difference = t.total_sigma_l_difference / std::abs(ref);
  t.interior_difference = std::pow(t.scale_c / 1.001, n - 2 * l) * s.against_metric[l] - ref;
  if (t.relative_difference > tolerance || t.interior_difference > tolerance * std::abs(ref)) {
    t.verdict = TrialVerdict::violation;
    t.reason = "total sigma_l exceeds the reference";
  }
  return t;
}

std::vector<ComparisonTrial> sphere_comparison_experiment(const FunctionalConfig& cfg_in, const ComparisonSettings& st) {
  cfg_in.validate();
  if (!(cfg_in.lambda > 0.0)) throw PreconditionError("sphere_comparison_experiment: needs lambda > 0");
  if (2 * cfg_in.l >= cfg_in.n) throw PreconditionError("sphere_comparison_experiment: needs l < n/2");
  if (st.trials < 100) throw PreconditionError("sphere_comparison_experiment: needs at least 100 trials");
  if (!(st.epsilon > 0.0)) throw DomainError("sphere_comparison_experiment: epsilon must be positive");
  const int n = cfg_in.n;
  const int order = st.order > 0 ? st.order : (n == 3 ? 12 : 10);
  const SphereModel model = SphereModel::build(n, cfg_in.lambda, order);
  FunctionalConfig cfg = cfg_in;
  cfg.volume = model.quadrature_volume();

  return parallel_map<ComparisonTrial>(static_cast<std::size_t>(st.trials), [&](std::size_t i) {
    std::seed_seq seq{static_cast<std::uint32_t>(st.seed), static_cast<std::uint32_t>(st.seed >> 32),
                      static_cast<std::uint32_t>(i)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> N(0.0, 1.0);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    Eigen::VectorXd b(n + 1);
    for (int j = 0; j <= n; ++j) b(j) = N(rng);
    Eigen::MatrixXd Q(n + 1, n + 1);
    for (int a = 0; a <= n; ++a)
      for (int c = 0; c <= n; ++c) Q(a, c) = N(rng);
    const double w1 = U(rng);
    const double c0 = 0.5 * N(rng);
    const double rho = 0.1 + 0.9 * U(rng);
    const AmbientQuadratic deg1 = AmbientQuadratic::linear(b / b.norm());
    AmbientQuadratic deg2 = AmbientQuadratic::harmonic_quadratic(Q);
    deg2 = deg2 * (1.0 / deg2.Q.norm());
    AmbientQuadratic phi = deg1 * w1 + deg2 * (1.0 - w1) + AmbientQuadratic::constant(n + 1, c0);
    phi = phi * (st.epsilon * rho / c2_proxy(model, phi));
    ComparisonTrial t = comparison_trial(cfg, model, phi, st.tolerance);
    t.index = static_cast<int>(i);
    char buf[160];
    std::snprintf(buf, sizeof buf, "deg1 weight %.4f, deg2 weight %.4f, constant %.4f, proxy %.3e", w1, 1.0 - w1, c0,
                  t.proxy);
    t.description = buf;
    return t;
  });
}

}  // namespace sigmalab
