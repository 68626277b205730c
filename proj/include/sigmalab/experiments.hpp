#pragma once

// End-to-end runs: the product counterexample scan with exact ratios, the
// t^2 audit of sigma_k along that family, the instability certificate of
// S^m x S^m, and randomized comparison trials on the round sphere.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sigmalab/functional.hpp"
#include "sigmalab/models.hpp"

namespace sigmalab {

inline constexpr std::uint64_t kDefaultSeed = 0x5EEDED;

/// +-{0.01, 0.02, 0.05, 0.1, 0.2} in increasing order, with 0 in the middle.
std::vector<double> default_t_grid();

struct CounterexampleRow {
  double t = 0.0;
  int k = 0;
  int l = 0;
  double sigma_k_ratio = 1.0;        ///< sigma_k(g_t) / sigma_k(g)
  double total_sigma_l_ratio = 1.0;  ///< int sigma_l(g_t) dv_{g_t} / int sigma_l(g) dv_g
  double volume_ratio = 1.0;         ///< exact a^{m/2} b^{m/2}
  double volume_ratio_closed = 1.0;  ///< closed form in t
  bool constraint_holds = false;     ///< sigma_k ratio >= 1
  bool comparison_violated = false;  ///< constraint holds and total ratio > 1
};

/// Rows for every t in the grid and every (k, l) with l < k, k in k_range,
/// l in l_range, on S^m x S^m with Ric_i = lambda g_i.
std::vector<CounterexampleRow> counterexample_scan(double lambda, int m, const std::vector<double>& t_grid,
                                                   const std::vector<int>& k_range, const std::vector<int>& l_range);

struct ExpansionAudit {
  int k = 0;
  double fitted = 0.0;   ///< t^2 coefficient of sigma_k(g_t)/sigma_k(g)
  double bracket = 0.0;  ///< the closed-form bracket being audited
  double fit_residual = 0.0;
  bool agree = false;    ///< |fitted - bracket| <= 1e-6 max(1, |bracket|)
  std::vector<double> coefficients;  ///< fitted c_0..c_4 in t
};

/// Degree-4 least-squares fit of the exact ratio over t in +-{0.005, 0.01,
/// 0.02} plus t = 0. Throws GridError when the worst residual exceeds 1e-8.
ExpansionAudit expansion_coefficient_audit(double lambda, int m, int k);

/// The audited bracket
///   (k^2/4 + k + 3k(n-k)/(4(n-1))) ((n-2)/(2(n-1)))^{-2} + k/(2n).
double expansion_bracket(int n, int k);

struct InstabilityCertificate {
  double eigenvalue = 0.0;    ///< Delta_E on hc by brute-force contraction
  double closed_form = 0.0;   ///< 2 lambda
  bool unstable = false;      ///< eigenvalue > 0
};

/// S^m x S^m with Ric = lambda g and hc = -g_1 + g_2 (or a caller tensor in
/// an orthonormal frame). Throws DomainError for m < 2 and PreconditionError
/// when hc is not trace-free.
InstabilityCertificate instability_certificate(double lambda, int m,
                                               const std::optional<Eigen::MatrixXd>& hc = std::nullopt);

enum class TrialVerdict { ok, violation, skipped };
const char* to_string(TrialVerdict v);

struct ComparisonTrial {
  int index = 0;
  std::string description;
  double proxy = 0.0;             ///< C^2 proxy of phi over the nodes
  double scale_c = 1.0;
  double min_sigma_k_ratio = 1.0; ///< min over nodes of sigma_k(c^2 g) / sigma_k(ref)
  double refined_min_ratio = 1.0; ///< same after local refinement of the minimum
  double total_sigma_l_difference = 0.0;  ///< int sigma_l(c^2 g) dv - int sigma_l(ref) dv
  double relative_difference = 0.0;
  double interior_difference = 0.0;       ///< same with c / 1.001
  TrialVerdict verdict = TrialVerdict::ok;
  std::string reason;
};

struct ComparisonSettings {
  int trials = 100;
  double epsilon = 1e-2;
  std::uint64_t seed = kDefaultSeed;
  int order = 0;  ///< quadrature order; 0 picks 12 for n = 3 and 10 for n = 4
  double tolerance = 1e-10;  ///< relative slack before a difference counts as a violation
};

/// One trial for a given phi (exposed for direct checks).
ComparisonTrial comparison_trial(const FunctionalConfig& cfg, const SphereModel& model, const AmbientQuadratic& phi,
                                 double tolerance = 1e-10);

/// Requires lambda > 0, l < n/2, l < k and trials >= 100. Rows are ordered by
/// trial index and depend only on (cfg, settings).
std::vector<ComparisonTrial> sphere_comparison_experiment(const FunctionalConfig& cfg, const ComparisonSettings& s);

/// C^2 proxy max_p (|phi| + |d phi| + |Hess phi|_F) over the model nodes.
double c2_proxy(const SphereModel& model, const AmbientQuadratic& phi);

}  // namespace sigmalab
