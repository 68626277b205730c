#pragma once

// The comparison functional
//   F(g) = (int sigma_l(g) dv_g)^{2k} (int sigma_k(g) dv_ref)^{n-2l},
// its first and second variations at an Einstein reference, the coefficient
// algebra of the second variation, and the sign analysis built on the
// Obata, Weitzenboeck and algebraic-lemma inputs.
//
// lambda always means the main convention Ric = (n-1) lambda g.

#include <functional>
#include <string>
#include <vector>

#include "sigmalab/models.hpp"

namespace sigmalab {

enum class BetaVariant { n_minus_2l, two_n_minus_l };
const char* to_string(BetaVariant v);
/// Accepts "n-2l" / "n_minus_2l" and "2n-l" / "2n_minus_l".
BetaVariant parse_beta_variant(const std::string& s);

struct FunctionalConfig {
  int n = 4;
  int k = 2;
  int l = 0;
  double lambda = 1.0;
  BetaVariant beta_variant = BetaVariant::n_minus_2l;
  double volume = 1.0;  ///< Vol of the reference metric

  /// Throws DomainError unless n >= 3, 0 <= l < k <= n, 2l != n, lambda != 0,
  /// volume > 0 and (k = 1 implies l = 0).
  void validate() const;
  std::string label() const;
};

struct Coefficients {
  double alpha = 0.0;
  double beta = 0.0;
  double mu = 0.0;
  double a_coeff = 0.0;
  bool k1_route = false;
};

/// For k >= 2 the general algebra. For k = 1 the dedicated display is cast
/// into the same shape: alpha = -lambda (so alpha/lambda = -1 multiplies
/// int h.Delta_E h), beta = (n-1)(n+2)/n^2, mu = NaN and a_coeff absorbs the
/// remaining constant, so total = a lambda^{n-1} (alpha/lambda I + beta J)
/// holds on both routes.
Coefficients coefficients(const FunctionalConfig& cfg);

/// The general-route a(n, k, l) with the (k-1) algebra evaluated at l = 0,
/// q = n, usable at k = 1 for cross-checking the dedicated display.
Coefficients coefficients_general_l0(const FunctionalConfig& cfg);

struct FunctionalValue {
  double F = 0.0;
  double int_sigma_l = 0.0;  ///< int sigma_l(g) dv_g
  double int_sigma_k = 0.0;  ///< int sigma_k(g) dv_ref
};
/// Throws DomainError on a vanishing factor raised to a negative power.
FunctionalValue assemble_F(const FunctionalConfig& cfg, double int_sigma_l, double int_sigma_k);

/// int sigma_j(g) dv_g and int sigma_j(g) dv_ref for j = 0..n, plus their
/// differences from the reference values, accumulated from pointwise
/// differences so that they stay accurate relative to their own size.
struct SigmaIntegrals {
  std::vector<double> against_metric;
  std::vector<double> against_reference;
  std::vector<double> metric_increment;
  std::vector<double> reference_increment;
};

/// A conformal path on a sphere model with u, du and Hess u cached per node.
class SpherePathEvaluator {
 public:
  SpherePathEvaluator(const SphereModel& model, ConformalPath path);
  SigmaIntegrals integrals(double t) const;
  FunctionalValue F(const FunctionalConfig& cfg, double t) const;
  /// F(t) - F(reference metric), without cancellation.
  double F_increment(const FunctionalConfig& cfg, double t) const;
  const SphereModel& model() const { return *model_; }
  const ConformalPath& path() const { return path_; }

 private:
  const SphereModel* model_;
  ConformalPath path_;
  std::vector<ScalarSample> samples_;
};

/// F of the product metric a g_1 + b g_2; the sigma_l integral uses dv_g.
FunctionalValue F_value_product(const FunctionalConfig& cfg, const ProductEinsteinModel& model);

/// Product model of dimension cfg.n through the reference metric, main convention.
ProductEinsteinModel reference_product(const FunctionalConfig& cfg);

struct FirstVariation {
  double formula = 0.0;
  double oracle = 0.0;  ///< Richardson-corrected centered difference
  double scale = 0.0;   ///< |a| |lambda|^{nk-1} sqrt(Vol) ||h||_{L^2}
};
/// DF(ref).h for h = u g on a sphere model, from the pointwise first
/// variations integrated by quadrature; the oracle differences F along
/// (1 + t u) g at step 1e-4.
FirstVariation dF_at_reference(const FunctionalConfig& cfg, const SphereModel& model, const AmbientQuadratic& u,
                               double step = 1e-4);

struct SecondVariationBreakdown {
  double I_term = 0.0;
  double J_term = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double mu = 0.0;
  double a_coeff = 0.0;
  double total = 0.0;
  bool k1_route = false;
};

/// Trace-free part described by Delta_E hc = einstein_eigenvalue hc with
/// int |hc|^2 = norm2_integral; the zero tensor has norm2_integral = 0.
struct TraceFreeEigen {
  double einstein_eigenvalue = 0.0;
  double norm2_integral = 0.0;
};

SecondVariationBreakdown d2F_formula(const FunctionalConfig& cfg, const TraceFreeEigen& hc, double J_term);
/// h = u g on a sphere model, J by quadrature.
SecondVariationBreakdown d2F_sphere_conformal(const FunctionalConfig& cfg, const SphereModel& model,
                                              const AmbientQuadratic& u);
/// hc = amplitude (-g_1 + g_2) on S^m x S^m, tr h = 0.
SecondVariationBreakdown d2F_product(const FunctionalConfig& cfg, double amplitude = 1.0);
/// Eigenvalue of Delta_E on the parallel tensor -g_1 + g_2, from the
/// brute-force Rm contraction; throws PreconditionError when the tensor
/// is not trace-free.
double product_einstein_eigenvalue(const ProductEinsteinModel& model, const Eigen::MatrixXd& hc);
Eigen::MatrixXd product_split_tensor(int m, double amplitude = 1.0);

struct SecondDifference {
  double estimate = 0.0;  ///< Richardson value (4 D(t0/2) - D(t0)) / 3
  double coarse = 0.0;    ///< D(t0)
  double fine = 0.0;      ///< D(t0/2)
  double step = 0.0;      ///< t0 actually used
};
/// Second central difference of f at 0 with one Richardson halving. When
/// |coarse - fine| > agree * max(|estimate|, scale) the whole pair is retried
/// at half the step, up to max_retries times, then StepSizeError.
SecondDifference d2F_numeric(const std::function<double(double)>& f, double scale, double t0 = 1e-3,
                             double agree = 1e-5, int max_retries = 3);

/// The second-variation scale |a| |lambda|^{nk-1} int |h|^2.
double second_variation_scale(const FunctionalConfig& cfg, double h_norm2_integral);

struct SpectralInputs {
  double lambda_E = 0.0;  ///< min spec of -Delta_E on TT
  double k_max = 0.0;
  double k_min = 0.0;
};
/// Round sphere of curvature lambda: lambda_E = 2(n+1) lambda, K = lambda.
SpectralInputs sphere_spectral_inputs(int n, double lambda);

enum class PredictedSign { nonpositive, nonnegative, none };
const char* to_string(PredictedSign s);

struct SignAnalysis {
  PredictedSign sign = PredictedSign::none;
  std::string reason;
  double scalar = 0.0;              ///< R = n(n-1) lambda
  double theta_bound = 0.0;         ///< min((n-2)K_max - R/n, R/n - n K_min)
  double lambda_E_lower = 0.0;      ///< -theta_bound - (n-1) lambda
  bool weitzenbock_consistent = false;  ///< lambda_E >= lambda_E_lower
  bool kmax_condition = false;      ///< K_max <= (n/2) lambda
  double k_independent_bound = 0.0; ///< -n(n-2) lambda / 2
  bool k_independent_holds = false; ///< lambda_E >= k_independent_bound
  bool strictly_stable = false;
  double alpha = 0.0;
  double beta = 0.0;
};
/// Throws DomainError on inconsistent inputs (K_min > K_max).
SignAnalysis sign_analysis(const FunctionalConfig& cfg, const SpectralInputs& in);

struct ObataGap {
  double lhs = 0.0;  ///< int |du|^2
  double rhs = 0.0;  ///< n lambda int (u - mean)^2
  double gap = 0.0;
  double scale = 0.0;
};
ObataGap obata_gap(const SphereModel& model, const AmbientQuadratic& u);

}  // namespace sigmalab
