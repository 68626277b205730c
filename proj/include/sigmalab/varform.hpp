#pragma once

// Closed-form first and second variations of the inverse metric, volume,
// Ricci, scalar and sigma_k curvature, with comparators against the jet
// oracles of chartcurv.
//
// Every field lives in an orthonormal frame at one point, so indices are
// raised for free. Conventions follow chartcurv, plus
//   Laplacian   (Delta T) = g^{ab} nabla_a nabla_b T
//   divergence  (delta h)_j = -nabla^i h_ij
//   (Rm h)_ij = R_{ikjl} h^{kl}
//   Delta_E h = Delta h + 2 Rm(h)
//   Delta_L h = Delta_E h - Ric o h - h o Ric

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "sigmalab/chartcurv.hpp"
#include "sigmalab/models.hpp"
#include "sigmalab/tensor.hpp"

namespace sigmalab {

struct PerturbationFields {
  int n = 0;
  Tensor4<double> riemann;  ///< R_abcd
  Eigen::MatrixXd ricci;
  double scalar = 0.0;
  Eigen::MatrixXd h;
  Tensor3<double> dh;   ///< (b, i, j) -> nabla_b h_ij
  Tensor4<double> ddh;  ///< (a, b, i, j) -> nabla_a nabla_b h_ij

  double trace() const { return h.trace(); }
  double norm2() const { return h.squaredNorm(); }
  Eigen::VectorXd div() const;        ///< delta h
  double div2() const;                ///< delta^2 h = nabla^i nabla^j h_ij
  Eigen::VectorXd dtrace() const;     ///< d(tr h)
  Eigen::MatrixXd hess_trace() const; ///< nabla^2 (tr h)
  double lap_trace() const;           ///< Delta (tr h)
  Eigen::MatrixXd rough_laplacian() const;
  Eigen::MatrixXd rm_action(const Eigen::MatrixXd& k) const;
  Eigen::MatrixXd einstein_operator() const;      ///< Delta_E h
  Eigen::MatrixXd lichnerowicz() const;           ///< Delta_L h
  Eigen::MatrixXd lie_derivative_x() const;       ///< L_X g, X = (d tr h / 2 + delta h)^#
  double grad_norm2() const;                      ///< |nabla h|^2
};

/// Fields of h (t-independent JetMatrix on the chart of g) at the chart origin,
/// moved into a g-orthonormal frame. h needs x-degree >= 2.
PerturbationFields fields_from_chart(const ChartMetricJet& g, const JetMatrix& h);
/// Fields of h = u g at a sphere node.
PerturbationFields fields_conformal_node(const SphereModel& model, const SphereNode& node, const AmbientQuadratic& u);
/// Round-sphere curvature of radius r in an orthonormal frame.
void set_round_curvature(PerturbationFields& f, double lambda);

// Inverse metric, in coordinates: first -g^{-1} h g^{-1}, second 2 g^{-1} h g^{-1} h g^{-1}.
struct MatrixVariation {
  Eigen::MatrixXd first;
  Eigen::MatrixXd second;
};
MatrixVariation dg_inverse_variations(const Eigen::MatrixXd& g, const Eigen::MatrixXd& h);

// Pointwise volume density variations: (tr h)/2 and ((tr h)^2 - 2|h|^2)/4.
struct ScalarVariation {
  double first = 0.0;
  double second = 0.0;
};
ScalarVariation dvol_density(const Eigen::MatrixXd& h);

/// How the curvature symbol R_{ijkl} in the second Ricci variation maps onto
/// the stored tensor. The working reading is R_{ijkl} -> R_abcd(i, j, l, k),
/// i.e. the opposite sign of the literal index order under this library's
/// convention; the literal reading is kept for comparison.
enum class RiemannReading { swapped_pair, literal };

Eigen::MatrixXd dric_first(const PerturbationFields& f);
Eigen::MatrixXd dric_second(const PerturbationFields& f, RiemannReading r = RiemannReading::swapped_pair);

/// gamma h = -Delta tr h + delta^2 h - <Ric, h>.
double gamma_op(const PerturbationFields& f);
double dscal_second(const PerturbationFields& f);

/// Background Einstein constant lambda with Ric = (n-1) lambda g; throws
/// PreconditionError when the stored curvature is not Einstein.
double einstein_lambda(const PerturbationFields& f, double tol = 1e-9);

double dsigma_k_first_einstein(const PerturbationFields& f, int k);

/// Terms of the second sigma_k variation on an Einstein background.
struct SigmaSecondTerms {
  Eigen::MatrixXd s_dot;
  Eigen::MatrixXd s_ddot;
  double tr_s_ddot = 0.0;
  double s_dot_norm2 = 0.0;
  double h_dot_s = 0.0;
  double gamma = 0.0;
  double h_norm2 = 0.0;
  double total = 0.0;
};
SigmaSecondTerms dsigma_k_second_einstein(const PerturbationFields& f, int k,
                                          RiemannReading r = RiemannReading::swapped_pair);

/// Jet-oracle values along g + t h at the chart origin, in the same frame.
struct JetOracle {
  Eigen::MatrixXd ric_first, ric_second;
  double scal_first = 0.0, scal_second = 0.0;
  Eigen::MatrixXd ginv_first, ginv_second;  ///< upper indices, frame components
  double vol_first = 0.0, vol_second = 0.0; ///< density ratio derivatives
  std::vector<double> sigma_first, sigma_second;  ///< index k = 0..n
};
JetOracle jet_oracle(const ChartMetricJet& g, const JetMatrix& h);

struct VariationReport {
  std::string id;
  std::string anchor;
  double formula = 0.0;
  double oracle = 0.0;
  double abs_residual = 0.0;
  double rel_residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  bool discrepancy_candidate = false;
  std::string note;
};

/// residual = |formula - oracle| / max(1, |oracle|); pass iff residual <= tol.
VariationReport make_report(std::string id, std::string anchor, double formula, double oracle, double tol);
/// Tensor comparison with residual max|F - O| / max(1, max|O|); formula and
/// oracle fields carry the largest entries.
VariationReport make_report(std::string id, std::string anchor, const Eigen::MatrixXd& formula,
                            const Eigen::MatrixXd& oracle, double tol);

/// A randomized pointwise case: background chart (flat or round) plus h.
struct LemmaCase {
  std::string background;  ///< "flat", "S3", "S4"
  ChartMetricJet g;
  JetMatrix h;
};
/// Random polynomial h (degree <= 2, coefficients in [-1, 1]) or, every third
/// case, a chart-restricted harmonic u times g.
std::vector<LemmaCase> random_lemma_cases(int count, unsigned long long seed);

/// All pointwise comparators for one case (Lemmas on inverse metric, volume,
/// Ricci, scalar, sigma_k for k = 1..n on Einstein backgrounds).
std::vector<VariationReport> verify_case(const LemmaCase& c, int case_index, double tol = 1e-8);

/// The four integrated identities for conformal h = u g on a sphere model
/// with the trace-free part absent.
std::vector<VariationReport> integrated_identities(const SphereModel& model, const AmbientQuadratic& u,
                                                   double tol = 1e-6);

/// Lemma on volume, integrated over a sphere model for h = u g, against the
/// exact density jet (1 + t u)^{n/2}.
struct IntegratedVariation {
  ScalarVariation formula;
  ScalarVariation oracle;
};
IntegratedVariation dvol_variations(const SphereModel& model, const AmbientQuadratic& u);

}  // namespace sigmalab
