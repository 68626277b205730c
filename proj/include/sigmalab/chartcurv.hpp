#pragma once

// Curvature of a metric given as a jet on a coordinate chart about x = 0.
//
// Conventions, fixed throughout the library:
//   R^a_{bcd} = d_c G^a_{db} - d_d G^a_{cb} + G^a_{ce} G^e_{db} - G^a_{de} G^e_{cb}
//   R_{abcd}  = g_{ae} R^e_{bcd}, so that on constant curvature kappa
//               R_{ikjl} = kappa (g_ij g_kl - g_il g_kj)
//   Ric_{bd}  = g^{ac} R_{abcd},  R = g^{bd} Ric_{bd}
//   S         = Ric - R / (2(n-1)) g        (Schouten, unnormalized)

#include <Eigen/Dense>

#include <vector>

#include "sigmalab/polyjet.hpp"
#include "sigmalab/tensor.hpp"

namespace sigmalab {

inline constexpr int kDefaultXDeg = 4;
inline constexpr int kDefaultTDeg = 2;

/// Metric components g_ij(t, x) as jets about the chart origin.
class ChartMetricJet {
 public:
  /// Validates symmetry and positive definiteness of the constant term.
  explicit ChartMetricJet(JetMatrix components);

  static ChartMetricJet euclidean(int n, int xdeg = kDefaultXDeg, int tdeg = kDefaultTDeg);

  int dim() const { return g_.dim(); }
  int xdeg() const;
  int tdeg() const { return g_(0, 0).tdeg(); }
  const std::shared_ptr<const MonomialBasis>& basis() const { return g_(0, 0).basis(); }
  const JetMatrix& components() const { return g_; }
  const PolyJet& operator()(int i, int j) const { return g_(i, j); }

  /// Zero jet in the same jet space.
  PolyJet zero() const { return PolyJet(basis(), tdeg()); }

  /// g + t h + t^2 m (m optional); h and m must be t-independent.
  ChartMetricJet perturbed(const JetMatrix& h) const;
  ChartMetricJet perturbed(const JetMatrix& h, const JetMatrix& m) const;
  /// e^{2 phi} g for a scalar jet phi.
  ChartMetricJet conformal(const PolyJet& phi) const;

 private:
  JetMatrix g_;
};

/// Curvature at the chart origin, every quantity a t-jet.
struct CurvaturePoint {
  int dim = 0;
  JetMatrix metric;
  JetMatrix inverse_metric;
  Tensor3<PolyJet> christoffel;  ///< (k, i, j) -> G^k_ij
  Tensor4<PolyJet> riemann;      ///< (a, b, c, d) -> R_abcd
  JetMatrix ricci;
  PolyJet scalar;
  JetMatrix schouten;
};

/// Christoffel symbols G^k_ij as jets exact through xdeg - 1.
Tensor3<PolyJet> christoffel_field(const ChartMetricJet& g, const JetMatrix& inverse);

/// Throws CapabilityError when xdeg < 2 and GeometryError when the base
/// metric is not positive definite.
CurvaturePoint curvature_at_base(const ChartMetricJet& g);

/// sigma_k of the Schouten endomorphism g^{ip} S_pj at the origin, as a t-jet,
/// computed by the Kronecker-delta contraction on jets.
PolyJet sigma_k_at_base(const ChartMetricJet& g, int k);
PolyJet sigma_k_at_base(const CurvaturePoint& c, int k);

/// sigma_k by eigenvalues of the Schouten endomorphism with the t-jets
/// evaluated at a sample value of t.
double sigma_k_sampled(const CurvaturePoint& c, int k, double t);

/// Hyperspherical chart on the round sphere S^n of given radius. The chart map
/// is theta -> rotation * X(theta), X the standard hyperspherical embedding
///   X_1 = r cos th_1, X_2 = r sin th_1 cos th_2, ..., X_{n+1} = r sin th_1 ... sin th_n,
/// centered at base_angles (chart coordinate x = theta - base_angles).
struct SphereChart {
  int n = 3;
  double radius = 1.0;
  Eigen::VectorXd base_angles;
  Eigen::MatrixXd rotation;  ///< (n+1) x (n+1) orthogonal

  /// Base angles all pi/2, identity rotation.
  static SphereChart interior(int n, double radius);
  /// Chart of the given rotation whose origin is the ambient point p.
  static SphereChart centered_at(const Eigen::VectorXd& p, const Eigen::MatrixXd& rotation);

  Eigen::VectorXd base_point() const;
  ChartMetricJet metric(int xdeg = kDefaultXDeg, int tdeg = kDefaultTDeg) const;
  /// Ambient coordinates p_A(x) as jets in the chart.
  std::vector<PolyJet> ambient(const std::shared_ptr<const MonomialBasis>& basis, int tdeg) const;
};

}  // namespace sigmalab
