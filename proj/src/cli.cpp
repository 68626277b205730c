#include "sigmalab/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "sigmalab/chartcurv.hpp"
#include "sigmalab/errors.hpp"
#include "sigmalab/polyjet.hpp"
#include "sigmalab/symalg.hpp"
#include "sigmalab/varform.hpp"

namespace sigmalab {

namespace {

using nlohmann::json;

template <typename... Args>
std::string strf(const char* fmt, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

const Triple kDefaultTuples[] = {{3, 2, 0}, {3, 2, 1}, {3, 3, 1}, {4, 2, 0}, {4, 2, 1}, {4, 3, 1}};

std::map<std::string, double Tolerances::*> tolerance_keys() {
  return {{"tol_volume", &Tolerances::volume},         {"tol_sigma_routes", &Tolerances::sigma_routes},
          {"tol_lemmas", &Tolerances::lemmas},         {"tol_identities", &Tolerances::identities},
          {"tol_dF", &Tolerances::dF},                 {"tol_d2F_sphere", &Tolerances::d2F_sphere},
          {"tol_d2F_product", &Tolerances::d2F_product}, {"tol_scaling", &Tolerances::scaling},
          {"tol_sign", &Tolerances::sign},             {"tol_obata", &Tolerances::obata},
          {"tol_volume_ratio", &Tolerances::volume_ratio}, {"tol_certificate", &Tolerances::certificate},
          {"tol_audit", &Tolerances::audit},           {"tol_compare", &Tolerances::compare}};
}

std::uint64_t parse_seed(const std::string& s) {
  try {
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(s, &pos, 0);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("seed: not an unsigned integer: " + s);
  }
}

FunctionalConfig make_cfg(const Triple& t, double lambda, BetaVariant beta, double volume = 1.0) {
  FunctionalConfig c;
  c.n = t.n;
  c.k = t.k;
  c.l = t.l;
  c.lambda = lambda;
  c.beta_variant = beta;
  c.volume = volume;
  return c;
}

bool sphere_backend(const RunConfig& c, int n) {
  return (n == 3 || n == 4) && c.lambda > 0.0 && c.model != "product";
}
bool product_backend(const RunConfig& c, int n) { return n % 2 == 0 && n >= 4 && c.model != "sphere"; }

int sphere_order(const RunConfig& c, int n, int dflt3, int dflt4) {
  if (c.order > 0) return c.order;
  return n == 3 ? dflt3 : dflt4;
}

double conformal_norm2(const SphereModel& m, const AmbientQuadratic& u) {
  return m.dim() * m.integrate([&](const SphereNode& nd) {
    const double v = u.value(nd.x);
    return v * v;
  });
}

// ---- selftest -------------------------------------------------------------

void selftest(const RunConfig& c, Report& rep) {
  const double pi = std::numbers::pi;
  for (int n : {3, 4}) {
    const SphereModel m = SphereModel::build(n, 1.0, c.order > 0 ? c.order : 16);
    const std::string s = "S" + std::to_string(n);
    const double exact = n == 3 ? 2.0 * pi * pi : 8.0 * pi * pi / 3.0;
    const double vol = m.quadrature_volume();
    rep.add(check_row("volume." + s, "volume of the unit sphere", vol, exact, rel(vol, exact) , c.tol.volume));
    const double x2 = m.integrate([](const SphereNode& nd) { return nd.x(0) * nd.x(0); });
    rep.add(check_row("moment.x0^2." + s, "quadrature moments", x2, exact / (n + 1), rel(x2, exact / (n + 1)),
                      c.tol.volume));
    const double x4 = m.integrate([](const SphereNode& nd) { return std::pow(nd.x(0), 4); });
    const double e4 = 3.0 * exact / ((n + 1.0) * (n + 3.0));
    rep.add(check_row("moment.x0^4." + s, "quadrature moments", x4, e4, rel(x4, e4), c.tol.volume));
  }

  std::mt19937_64 rng(c.seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  double worst = 0.0;
  int compared = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + trial % 4;
    Eigen::MatrixXd a(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) a(i, j) = U(rng);
    const auto e = SymEndo<double>::orthonormal(a + a.transpose());
    const Eigen::VectorXd ev = e.eigenvalues().cwiseAbs();
    for (int k = 1; k <= n; ++k) {
      const double natural = elem_sym(ev, k);
      worst = std::max(worst, std::abs(sigma_via_delta(e, k) - sigma_via_eigen(e, k)) / std::max(natural, 1e-300));
      ++compared;
    }
  }
  rep.add(check_row("sigma_k.delta_vs_eigen", "sigma_k by Kronecker contraction and by eigenvalues", compared, 0,
                    worst, c.tol.sigma_routes, "value is the number of comparisons, residual the worst one"));

  int total = 0, ok = 0;
  for (int n = 2; n <= 4; ++n)
    for (int k = 2; k <= n; ++k)
      for (int p = 1; p < k; ++p) {
        ++total;
        ok += contraction_rule_check(p, k, n);
      }
  rep.add(check_row("contraction_rule", "contraction rule of the generalized Kronecker delta", ok, total, total - ok,
                    0.0));

  const auto basis = MonomialBasis::get(1, 0);
  const PolyJet one = PolyJet::constant(basis, 6, 1.0);
  const PolyJet x = one + PolyJet::parameter(basis, 6);
  auto jet_gap = [](const PolyJet& a, const PolyJet& b) {
    double g = 0.0;
    for (int p = 0; p <= a.tdeg(); ++p) g = std::max(g, std::abs(a.t_coeff(p) - b.t_coeff(p)));
    return g;
  };
  const double g1 = jet_gap(x.log().exp(), x);
  const double g2 = jet_gap(x * x.inverse(), one);
  const double g3 = jet_gap(x.sqrt() * x.sqrt(), x);
  rep.add(check_row("jet.exp_log", "truncated jet arithmetic", g1, 0, g1, 1e-13));
  rep.add(check_row("jet.inverse", "truncated jet arithmetic", g2, 0, g2, 1e-13));
  rep.add(check_row("jet.sqrt", "truncated jet arithmetic", g3, 0, g3, 1e-13));

  const CurvaturePoint cp = curvature_at_base(SphereChart::interior(3, 1.0).metric());
  rep.add(check_row("chart.scalar.S3", "curvature of the unit 3-sphere chart", cp.scalar.value(), 6.0,
                    rel(cp.scalar.value(), 6.0), 1e-12));
  for (int k = 1; k <= 3; ++k) {
    const double v = sigma_k_at_base(cp, k).value();
    const double e = binomial(3, k) * std::pow(0.5, k);
    rep.add(check_row("chart.sigma_" + std::to_string(k) + ".S3", "curvature of the unit 3-sphere chart", v, e,
                      rel(v, e), 1e-12));
  }

  for (double t : {0.05, 0.1}) {
    const VolumeRatio vr = product_volume_ratio(2, t);
    rep.add(check_row(strf("volume_ratio.t=%g", t), "volume ratio along the product family", vr.exact,
                      vr.closed_form, rel(vr.exact, vr.closed_form), c.tol.volume_ratio));
  }
}

// ---- verify-lemmas --------------------------------------------------------

void verify_lemmas(const RunConfig& c, Report& rep) {
  const auto cases = random_lemma_cases(c.cases, c.seed);
  std::map<std::string, int> per_background;
  int curved = 0, literal_fail = 0;
  double literal_worst = 0.0;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    ++per_background[cases[i].background];
    for (const auto& r : verify_case(cases[i], static_cast<int>(i), c.tol.lemmas))
      rep.add(check_row(r.id, r.anchor, r.formula, r.oracle, r.rel_residual, r.tolerance, r.note));
    if (cases[i].background.rfind("flat", 0) == 0) continue;
    ++curved;
    const PerturbationFields f = fields_from_chart(cases[i].g, cases[i].h);
    const JetOracle o = jet_oracle(cases[i].g, cases[i].h);
    const double sc = std::max(1.0, o.ric_second.cwiseAbs().maxCoeff());
    const double res = (dric_second(f, RiemannReading::literal) - o.ric_second).cwiseAbs().maxCoeff() / sc;
    literal_worst = std::max(literal_worst, res);
    literal_fail += res > c.tol.lemmas;
  }
  for (const auto& [bg, count] : per_background)
    rep.add(info_row("cases." + bg, "randomized pointwise cases", count));
  rep.add(finding_row("ricci.second.literal_index_order", "Ricci second variation", literal_fail, curved,
                      literal_worst, c.tol.lemmas,
                      "curvature term read with the displayed index order; value counts failing curved cases, "
                      "reference the curved total; the swapped pair order is used for all checks above"));

  for (int n : {3, 4}) {
    const SphereModel m = SphereModel::build(n, 1.0, sphere_order(c, n, 12, 8));
    for (const auto& p : harmonic_library(n))
      for (const auto& r : integrated_identities(m, p.u, c.tol.identities))
        rep.add(check_row(r.id + ".S" + std::to_string(n) + "." + p.label, r.anchor, r.formula, r.oracle,
                          r.rel_residual, r.tolerance, r.note));
  }
}

// ---- verify-functional ----------------------------------------------------

const char* kAnchorCritical = "reference metric is a critical point of F";
const char* kAnchorSecond = "second variation of F at the reference";
const char* kAnchorSign = "sign of the second variation";
const char* kAnchorScaling = "scale invariance of F";
const char* kAnchorObata = "Obata inequality on the round sphere";

void functional_sphere(const RunConfig& c, const Triple& tp, const SphereModel& model, Report& rep) {
  const FunctionalConfig cfg = make_cfg(tp, c.lambda, c.beta_variant, model.quadrature_volume());
  FunctionalConfig alt = cfg;
  alt.beta_variant =
      c.beta_variant == BetaVariant::n_minus_2l ? BetaVariant::two_n_minus_l : BetaVariant::n_minus_2l;
  const std::string tag = cfg.label() + ".S" + std::to_string(tp.n);
  const Coefficients co = coefficients(cfg);
  rep.add(info_row("coefficients." + tag, "second variation coefficients", co.a_coeff, 0.0,
                   strf("a; alpha=%.17g beta=%.17g mu=%.17g route=%s", co.alpha, co.beta, co.mu,
                        co.k1_route ? "k=1" : "general")));
  const SpectralInputs spec = sphere_spectral_inputs(tp.n, c.lambda);
  const SignAnalysis sa = sign_analysis(cfg, spec);
  rep.add(info_row("sign_analysis." + tag, kAnchorSign, sa.lambda_E_lower, spec.lambda_E,
                   std::string("prediction ") + to_string(sa.sign) + "; " + sa.reason +
                       "; value is the Weitzenboeck lower bound, reference the TT eigenvalue"));

  double alt_worst = 0.0;
  const auto lib = harmonic_library(tp.n);
  for (const auto& p : lib) {
    const std::string id = tag + "." + p.label;
    const FirstVariation d = dF_at_reference(cfg, model, p.u);
    rep.add(check_row("dF.formula." + id, kAnchorCritical, d.formula, 0.0, std::abs(d.formula) / d.scale, c.tol.dF,
                      strf("scale=%.17g", d.scale)));
    rep.add(check_row("dF.oracle." + id, kAnchorCritical, d.oracle, 0.0, std::abs(d.oracle) / d.scale, c.tol.dF,
                      strf("scale=%.17g", d.scale)));

    const double sc = second_variation_scale(cfg, conformal_norm2(model, p.u));
    const SecondVariationBreakdown f = d2F_sphere_conformal(cfg, model, p.u);
    const SpherePathEvaluator lin(model, ConformalPath{ConformalPath::Kind::linear, p.u, 0.0});
    SecondDifference s;
    try {
      s = d2F_numeric([&](double t) { return lin.F_increment(cfg, t); }, sc);
    } catch (const StepSizeError& e) {
      rep.add(check_row("d2F.sphere." + id, kAnchorSecond, f.total, NAN, NAN, c.tol.d2F_sphere, e.what()));
      continue;
    }
    const double denom = std::max(std::abs(f.total), sc);
    rep.add(check_row("d2F.sphere." + id, kAnchorSecond, f.total, s.estimate, std::abs(f.total - s.estimate) / denom,
                      c.tol.d2F_sphere, strf("I=%.17g J=%.17g step=%g scale=%.17g", f.I_term, f.J_term, s.step, sc)));
    const SecondVariationBreakdown fa = d2F_sphere_conformal(alt, model, p.u);
    alt_worst = std::max(alt_worst, std::abs(fa.total - s.estimate) / denom);
    if (sa.sign == PredictedSign::nonpositive)
      rep.add(check_row("d2F.sign." + id, kAnchorSign, s.estimate, 0.0, std::max(0.0, s.estimate) / sc, c.tol.sign,
                        "predicted <= 0"));
    else if (sa.sign == PredictedSign::nonnegative)
      rep.add(check_row("d2F.sign." + id, kAnchorSign, s.estimate, 0.0, std::max(0.0, -s.estimate) / sc, c.tol.sign,
                        "predicted >= 0"));
    else
      rep.add(info_row("d2F.sign." + id, kAnchorSign, s.estimate, 0.0, "no prediction"));
  }
  rep.add(finding_row(std::string("beta_variant.") + to_string(alt.beta_variant) + "." + tag,
                      "second variation coefficients", alt_worst, 0.0, alt_worst, c.tol.d2F_sphere,
                      "worst disagreement of the alternative beta against the finite-difference oracle"));

  const AmbientQuadratic u = lib.front().u + lib.back().u * 0.5;
  const SpherePathEvaluator base(model, ConformalPath{ConformalPath::Kind::exponential, u, 0.0});
  const double F0 = base.F(cfg, 0.05).F;
  for (double s : {0.5, 2.0}) {
    const SpherePathEvaluator scaled(model, ConformalPath{ConformalPath::Kind::exponential, u, std::log(s)});
    const double Fs = scaled.F(cfg, 0.05).F;
    rep.add(check_row(strf("scaling.%s.c=%g", tag.c_str(), s), kAnchorScaling, Fs, F0,
                      std::abs(Fs - F0) / std::abs(F0), c.tol.scaling));
  }
}

void functional_product(const RunConfig& c, const Triple& tp, Report& rep) {
  const FunctionalConfig cfg = make_cfg(tp, c.lambda, c.beta_variant, 1.0);
  const std::string tag = cfg.label() + ".product";
  const SecondVariationBreakdown b = d2F_product(cfg);
  const ProductEinsteinModel p = reference_product(cfg);
  const double sc = second_variation_scale(cfg, tp.n * cfg.volume);
  try {
    const SecondDifference s = d2F_numeric(
        [&](double t) {
          ProductEinsteinModel q = p;
          q.a = 1.0 - t;
          q.b = 1.0 + t;
          return F_value_product(cfg, q).F;
        },
        sc);
    rep.add(check_row("d2F.product." + tag, kAnchorSecond, b.total, s.estimate,
                      std::abs(b.total - s.estimate) / std::max(std::abs(b.total), 1e-12 * sc), c.tol.d2F_product,
                      strf("I=%.17g J=%.17g step=%g", b.I_term, b.J_term, s.step)));
  } catch (const StepSizeError& e) {
    rep.add(check_row("d2F.product." + tag, kAnchorSecond, b.total, NAN, NAN, c.tol.d2F_product, e.what()));
  }
  ProductEinsteinModel q = p;
  q.a = 1.1;
  q.b = 0.95;
  const double F0 = F_value_product(cfg, q).F;
  for (double s : {0.5, 2.0}) {
    ProductEinsteinModel r = q;
    r.a *= s * s;
    r.b *= s * s;
    const double Fs = F_value_product(cfg, r).F;
    rep.add(check_row(strf("scaling.%s.c=%g", tag.c_str(), s), kAnchorScaling, Fs, F0,
                      std::abs(Fs - F0) / std::abs(F0), c.tol.scaling));
  }
}

void verify_functional(const RunConfig& c, Report& rep) {
  std::map<int, SphereModel> models;
  for (const auto& tp : resolve_tuples(c)) {
    if (sphere_backend(c, tp.n)) {
      auto it = models.find(tp.n);
      if (it == models.end())
        it = models.emplace(tp.n, SphereModel::build(tp.n, c.lambda, sphere_order(c, tp.n, 12, 8))).first;
      functional_sphere(c, tp, it->second, rep);
    }
    if (product_backend(c, tp.n)) functional_product(c, tp, rep);
  }
  for (const auto& [n, model] : models) {
    for (const auto& p : harmonic_library(n)) {
      const ObataGap g = obata_gap(model, p.u);
      const std::string id = "S" + std::to_string(n) + "." + p.label;
      rep.add(check_row("obata.gap." + id, kAnchorObata, g.gap, 0.0, std::max(0.0, -g.gap) / g.scale, c.tol.obata));
      if (p.kind == PerturbationKind::conformal_deg1)
        rep.add(check_row("obata.equality." + id, kAnchorObata, g.lhs, g.rhs, std::abs(g.gap) / g.scale,
                          c.tol.obata));
    }
  }
}

// ---- counterexample -------------------------------------------------------

void counterexample(const RunConfig& c, Report& rep) {
  const int n = c.n.value_or(4);
  const int m = n / 2;
  std::vector<int> ks, ls;
  for (int k = 1; k <= n; ++k) ks.push_back(k);
  for (int l = 0; l < n; ++l) ls.push_back(l);
  const char* anchor = "product counterexample family";
  for (const auto& r : counterexample_scan(c.lambda, m, c.t_grid, ks, ls)) {
    const std::string note = strf("constraint %s; comparison %s", r.constraint_holds ? "holds" : "fails",
                                  r.comparison_violated ? "violated" : "holds");
    if (r.k == 1 && r.l == 0 && r.t != 0.0) {
      const bool witness = r.sigma_k_ratio > 1.0 && r.volume_ratio > 1.0;
      rep.add(check_row(strf("witness.k=1,l=0.t=%g", r.t), anchor, r.sigma_k_ratio, r.volume_ratio, witness ? 0 : 1,
                        0.0, "value sigma_1 ratio, reference volume ratio; both above 1, " + note));
    } else {
      rep.add(info_row(strf("scan.k=%d,l=%d.t=%g", r.k, r.l, r.t), anchor, r.sigma_k_ratio, r.total_sigma_l_ratio,
                       "value sigma_k ratio, reference total sigma_l ratio; " + note));
    }
  }
  for (double t : c.t_grid) {
    const VolumeRatio vr = product_volume_ratio(m, t);
    rep.add(check_row(strf("volume_ratio.t=%g", t), anchor, vr.exact, vr.closed_form, rel(vr.exact, vr.closed_form),
                      c.tol.volume_ratio));
  }
  const InstabilityCertificate cert = instability_certificate(c.lambda, m);
  rep.add(check_row(strf("certificate.m=%d", m), "Einstein operator on the split tensor of S^m x S^m", cert.eigenvalue,
                    cert.closed_form, rel(cert.eigenvalue, cert.closed_form), c.tol.certificate,
                    cert.unstable ? "unstable" : "not unstable"));

  // The bracket is free of lambda, so the audit runs at lambda = 1.
  const char* audit_anchor = "t^2 expansion of sigma_k along the family";
  for (int k = 1; k <= n; ++k) {
    try {
      const ExpansionAudit a = expansion_coefficient_audit(1.0, m, k);
      if (k == 1) {
        const double exact = 1.0 / (2.0 * n);
        rep.add(check_row("expansion.exact.k=1", audit_anchor, a.fitted, exact, std::abs(a.fitted - exact),
                          c.tol.audit, "sigma_1 ratio is 1 + t^2/(2n) exactly"));
      }
      rep.add(finding_row(strf("expansion.bracket.k=%d", k), audit_anchor, a.fitted, a.bracket,
                          rel(a.fitted, a.bracket), 1e-6,
                          strf("value fitted t^2 coefficient at lambda = 1, reference the closed bracket; fit "
                               "residual %.3e",
                               a.fit_residual)));
    } catch (const GridError& e) {
      rep.add(check_row(strf("expansion.bracket.k=%d", k), audit_anchor, NAN, expansion_bracket(n, k), NAN, 1e-6,
                        e.what()));
    }
  }
}

// ---- compare-sphere -------------------------------------------------------

void compare_sphere(const RunConfig& c, Report& rep) {
  const char* anchor = "comparison of total sigma_l under a pointwise sigma_k bound";
  for (const auto& tp : resolve_tuples(c)) {
    const FunctionalConfig cfg = make_cfg(tp, c.lambda, c.beta_variant);
    ComparisonSettings st;
    st.trials = c.trials;
    st.epsilon = c.epsilon;
    st.seed = c.seed;
    st.order = c.order;
    st.tolerance = c.tol.compare;
    int violations = 0, skipped = 0;
    for (const auto& t : sphere_comparison_experiment(cfg, st)) {
      const std::string id = strf("compare.%s.trial_%03d", cfg.label().c_str(), t.index);
      if (t.verdict == TrialVerdict::skipped) {
        ++skipped;
        rep.add(info_row(id, anchor, NAN, 0.0, "skipped: " + t.reason));
        continue;
      }
      const bool hyp = t.min_sigma_k_ratio >= 1.0 - 1e-9;
      const bool bad = t.verdict == TrialVerdict::violation || !hyp;
      violations += bad;
      ReportRow r = check_row(id, anchor, t.relative_difference, 0.0, std::max(0.0, t.relative_difference),
                              c.tol.compare,
                              strf("c=%.17g; min sigma_k ratio %.17g; interior difference %.3e; ", t.scale_c,
                                   t.min_sigma_k_ratio, t.interior_difference) +
                                  t.description);
      if (bad) r.verdict = Verdict::fail;
      rep.add(r);
    }
    rep.add(check_row("compare." + cfg.label() + ".violations", anchor, violations, 0.0, violations, 0.0,
                      strf("%d trials, %d skipped, epsilon %g", c.trials, skipped, c.epsilon)));
  }
}

}  // namespace

nlohmann::json RunConfig::to_json() const {
  json j;
  j["command"] = command;
  if (n) j["n"] = *n;
  if (k) j["k"] = *k;
  if (l) j["l"] = *l;
  if (!tuples.empty()) {
    json t = json::array();
    for (const auto& x : tuples) t.push_back({x.n, x.k, x.l});
    j["tuples"] = t;
  }
  j["lambda"] = lambda;
  j["model"] = model;
  j["order"] = order;
  j["t_grid"] = t_grid;
  j["trials"] = trials;
  j["epsilon"] = epsilon;
  j["seed"] = seed;
  j["beta_variant"] = to_string(beta_variant);
  j["strict_paper"] = strict_paper;
  j["cases"] = cases;
  for (const auto& [key, ptr] : tolerance_keys()) j[key] = tol.*ptr;
  return j;
}

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"selftest", "verify-lemmas", "verify-functional", "counterexample",
                                                 "compare-sphere"};
  return names;
}

void apply_config_json(RunConfig& c, const json& j) {
  if (!j.is_object()) throw ConfigError("config: top level must be a JSON object");
  const auto tols = tolerance_keys();
  for (const auto& [key, v] : j.items()) {
    try {
      if (key == "command") {
        c.command = v.get<std::string>();
      } else if (key == "n") {
        c.n = v.get<int>();
      } else if (key == "k") {
        c.k = v.get<int>();
      } else if (key == "l") {
        c.l = v.get<int>();
      } else if (key == "tuples") {
        c.tuples.clear();
        for (const auto& t : v) {
          if (!t.is_array() || t.size() != 3) throw ConfigError("config: tuples entries must be [n, k, l]");
          c.tuples.push_back({t[0].get<int>(), t[1].get<int>(), t[2].get<int>()});
        }
      } else if (key == "lambda") {
        c.lambda = v.get<double>();
      } else if (key == "model") {
        c.model = v.get<std::string>();
      } else if (key == "order") {
        c.order = v.get<int>();
      } else if (key == "t_grid") {
        c.t_grid = v.get<std::vector<double>>();
      } else if (key == "trials") {
        c.trials = v.get<int>();
      } else if (key == "epsilon") {
        c.epsilon = v.get<double>();
      } else if (key == "seed") {
        c.seed = v.is_string() ? parse_seed(v.get<std::string>()) : v.get<std::uint64_t>();
      } else if (key == "beta_variant") {
        c.beta_variant = parse_beta_variant(v.get<std::string>());
      } else if (key == "out") {
        c.out = v.get<std::string>();
      } else if (key == "strict_paper") {
        c.strict_paper = v.get<bool>();
      } else if (key == "cases") {
        c.cases = v.get<int>();
      } else if (auto it = tols.find(key); it != tols.end()) {
        c.tol.*(it->second) = v.get<double>();
      } else {
        throw ConfigError("config: unknown key '" + key + "'");
      }
    } catch (const json::exception& e) {
      throw ConfigError("config: bad value for '" + key + "': " + e.what());
    } catch (const DomainError& e) {
      throw ConfigError("config: bad value for '" + key + "': " + e.what());
    }
  }
}

void load_config_file(RunConfig& c, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config: " + path + ": " + e.what());
  }
  apply_config_json(c, j);
}

std::vector<Triple> resolve_tuples(const RunConfig& c) {
  std::vector<Triple> out;
  if (!c.tuples.empty()) {
    out = c.tuples;
  } else if (c.n && c.k && c.l) {
    out.push_back({*c.n, *c.k, *c.l});
  } else if (c.n) {
    for (int k = 1; k <= *c.n; ++k)
      for (int l = 0; l < k; ++l) {
        if ((c.k && *c.k != k) || (c.l && *c.l != l)) continue;
        if (2 * l == *c.n || (k == 1 && l != 0)) continue;
        if (c.command == "compare-sphere" && 2 * l >= *c.n) continue;
        out.push_back({*c.n, k, l});
      }
  } else {
    if (c.k || c.l) throw ConfigError("--k and --l need --n");
    out.assign(std::begin(kDefaultTuples), std::end(kDefaultTuples));
  }
  if (out.empty()) throw ConfigError("no valid (n, k, l) selected");
  for (const auto& t : out) {
    try {
      make_cfg(t, c.lambda, c.beta_variant).validate();
    } catch (const DomainError& e) {
      throw ConfigError(e.what());
    }
  }
  return out;
}

void validate_config(const RunConfig& c) {
  const auto& names = command_names();
  if (std::find(names.begin(), names.end(), c.command) == names.end())
    throw ConfigError("unknown command '" + c.command + "'");
  if (!std::isfinite(c.lambda) || c.lambda == 0.0) throw ConfigError("lambda must be finite and nonzero");
  if (c.model != "auto" && c.model != "sphere" && c.model != "product")
    throw ConfigError("model must be auto, sphere or product");
  if (c.order != 0 && c.order < 8) throw ConfigError("order must be 0 or at least 8");
  if (c.cases < 1) throw ConfigError("cases must be positive");
  for (const auto& [key, ptr] : tolerance_keys())
    if (!(c.tol.*ptr >= 0.0)) throw ConfigError(key + " must be nonnegative");

  if (c.command == "verify-functional") {
    for (const auto& t : resolve_tuples(c))
      if (!sphere_backend(c, t.n) && !product_backend(c, t.n))
        throw ConfigError(strf("n=%d,k=%d,l=%d: no backend (sphere needs n in {3,4} and lambda > 0, product needs "
                               "even n >= 4)",
                               t.n, t.k, t.l));
  } else if (c.command == "counterexample") {
    const int n = c.n.value_or(4);
    if (n < 4 || n % 2 != 0) throw ConfigError("counterexample needs even n >= 4");
    if (c.t_grid.empty()) throw ConfigError("t_grid is empty");
    for (double t : c.t_grid)
      if (!(std::abs(t) < 0.5)) throw ConfigError(strf("t=%g outside |t| < 0.5", t));
  } else if (c.command == "compare-sphere") {
    if (!(c.lambda > 0.0)) throw ConfigError("compare-sphere needs lambda > 0");
    if (c.trials < 100) throw ConfigError("compare-sphere needs trials >= 100");
    if (!(c.epsilon > 0.0)) throw ConfigError("epsilon must be positive");
    for (const auto& t : resolve_tuples(c)) {
      if (t.n != 3 && t.n != 4) throw ConfigError("compare-sphere needs n in {3,4}");
      if (2 * t.l >= t.n) throw ConfigError("compare-sphere needs l < n/2");
    }
  }
}

Report run_command(const RunConfig& c) {
  validate_config(c);
  Report rep;
  rep.command = c.command;
  rep.seed = c.seed;
  rep.header = "config=" + c.to_json().dump();
  if (c.command == "selftest")
    selftest(c, rep);
  else if (c.command == "verify-lemmas")
    verify_lemmas(c, rep);
  else if (c.command == "verify-functional")
    verify_functional(c, rep);
  else if (c.command == "counterexample")
    counterexample(c, rep);
  else
    compare_sphere(c, rep);
  return rep;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"sigmalab: checks for sigma_k curvature comparison"};
  std::string command, config_path, seed, beta, out_dir, model;
  int n = 0, k = 0, l = 0, trials = 0, cases = 0, order = 0;
  double lambda = 0.0, epsilon = 0.0;
  std::vector<double> t_grid;
  bool strict = false;
  app.add_option("command", command, "selftest | verify-lemmas | verify-functional | counterexample | compare-sphere")
      ->required();
  auto* o_config = app.add_option("--config", config_path, "JSON config file (flat keys)");
  auto* o_n = app.add_option("--n", n, "dimension");
  auto* o_k = app.add_option("--k", k, "sigma_k index");
  auto* o_l = app.add_option("--l", l, "sigma_l index");
  auto* o_lambda = app.add_option("--lambda", lambda, "Einstein constant");
  auto* o_seed = app.add_option("--seed", seed, "random seed (decimal or 0x hex)");
  auto* o_trials = app.add_option("--trials", trials, "comparison trials per tuple");
  auto* o_eps = app.add_option("--epsilon", epsilon, "C^2 size of comparison perturbations");
  auto* o_grid = app.add_option("--t-grid", t_grid, "comma-separated t values")->delimiter(',');
  auto* o_beta = app.add_option("--beta-variant", beta, "n-2l or 2n-l");
  auto* o_strict = app.add_flag("--strict-paper", strict, "treat findings as failures");
  auto* o_out = app.add_option("--out", out_dir, "output directory");
  auto* o_cases = app.add_option("--cases", cases, "randomized pointwise cases");
  auto* o_model = app.add_option("--model", model, "auto, sphere or product");
  auto* o_order = app.add_option("--order", order, "quadrature order");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "sigmalab: " << e.what() << "\n" << app.help();
    return 1;
  }

  RunConfig c;
  try {
    if (o_config->count()) load_config_file(c, config_path);
    c.command = command;
    if (o_n->count()) c.n = n;
    if (o_k->count()) c.k = k;
    if (o_l->count()) c.l = l;
    if ((o_n->count() || o_k->count() || o_l->count()) && !c.tuples.empty()) c.tuples.clear();
    if (o_lambda->count()) c.lambda = lambda;
    if (o_seed->count()) c.seed = parse_seed(seed);
    if (o_trials->count()) c.trials = trials;
    if (o_eps->count()) c.epsilon = epsilon;
    if (o_grid->count()) c.t_grid = t_grid;
    if (o_beta->count()) {
      try {
        c.beta_variant = parse_beta_variant(beta);
      } catch (const DomainError& e) {
        throw ConfigError(e.what());
      }
    }
    if (o_strict->count()) c.strict_paper = strict;
    if (o_out->count()) c.out = out_dir;
    if (o_cases->count()) c.cases = cases;
    if (o_model->count()) c.model = model;
    if (o_order->count()) c.order = order;
    validate_config(c);
  } catch (const ConfigError& e) {
    err << "sigmalab: " << e.what() << "\n";
    return 1;
  }

  Report rep;
  try {
    rep = run_command(c);
  } catch (const ConfigError& e) {
    err << "sigmalab: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "sigmalab: " << c.command << " aborted: " << e.what() << "\n";
    return 2;
  }

  try {
    std::filesystem::create_directories(c.out);
    std::ofstream csv(std::filesystem::path(c.out) / "report.csv", std::ios::binary);
    csv << rep.csv();
    std::ofstream sum(std::filesystem::path(c.out) / "summary.json", std::ios::binary);
    sum << rep.summary(c.strict_paper).dump(2) << "\n";
    if (!csv || !sum) throw std::runtime_error("write failed");
  } catch (const std::exception& e) {
    err << "sigmalab: cannot write reports under " << c.out << ": " << e.what() << "\n";
    return 1;
  }

  out << c.command << ": " << rep.rows.size() << " rows, " << rep.count(Verdict::pass) << " pass, "
      << rep.count(Verdict::fail) << " fail, " << rep.count(Verdict::finding) << " finding, "
      << rep.count(Verdict::info) << " info\n";
  for (const auto& r : rep.rows) {
    if (r.verdict == Verdict::fail || r.verdict == Verdict::finding)
      out << "  " << to_string(r.verdict) << " " << r.id << " value=" << format_double(r.value)
          << " reference=" << format_double(r.reference) << " residual=" << format_double(r.residual) << "\n";
  }
  out << "reports: " << (std::filesystem::path(c.out) / "report.csv").string() << ", "
      << (std::filesystem::path(c.out) / "summary.json").string() << "\n";
  return rep.exit_code(c.strict_paper);
}

}  // namespace sigmalab
