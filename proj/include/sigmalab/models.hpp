#pragma once

// Model manifolds: the round sphere S^n(1/sqrt(lambda)) with a product
// quadrature rule, and the homogeneous product N_1 x N_2 of two Einstein
// factors with independent scales.
//
// Sphere fields are evaluated in an orthonormal tangent frame at each node,
// so tensor contractions are plain sums.

#include <Eigen/Dense>

#include <vector>

#include "sigmalab/chartcurv.hpp"
#include "sigmalab/tensor.hpp"

namespace sigmalab {

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v))
      comp_ += (sum_ - t) + v;
    else
      comp_ += (v - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Gauss rule for the weight (1 - c^2)^a on [-1, 1] by Golub-Welsch.
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
GaussRule gauss_gegenbauer(int points, double a);

struct SphereNode {
  Eigen::VectorXd x;      ///< ambient point, |x| = radius
  Eigen::MatrixXd frame;  ///< (n+1) x n, orthonormal tangent columns
  double weight = 0.0;
};

class SphereModel {
 public:
  /// Product rule with `order` Gauss points per polar angle and 2*order
  /// uniform points in the periodic angle. Requires n in {3, 4}, order >= 8.
  static SphereModel build(int n, double lambda, int order = 16);

  int dim() const { return n_; }
  double lambda() const { return lambda_; }
  double radius() const { return radius_; }
  int order() const { return order_; }
  const std::vector<SphereNode>& nodes() const { return nodes_; }
  /// Closed-form volume of S^n(1/sqrt(lambda)).
  double exact_volume() const;
  double quadrature_volume() const;

  /// Sum of f(node) * weight in node order with compensated summation.
  template <typename F>
  double integrate(F&& f) const {
    CompensatedSum s;
    for (const auto& nd : nodes_) s.add(f(nd) * nd.weight);
    return s.value();
  }

 private:
  int n_ = 0;
  int order_ = 0;
  double lambda_ = 1.0;
  double radius_ = 1.0;
  std::vector<SphereNode> nodes_;
};

/// U(x) = c + b.x + x^T Q x restricted to a round sphere centred at 0.
struct AmbientQuadratic {
  double c = 0.0;
  Eigen::VectorXd b;
  Eigen::MatrixXd Q;

  static AmbientQuadratic zero(int ambient_dim);
  static AmbientQuadratic constant(int ambient_dim, double value);
  static AmbientQuadratic linear(const Eigen::VectorXd& b);
  /// Symmetrizes and removes the trace of Q, giving a degree-2 harmonic.
  static AmbientQuadratic harmonic_quadratic(const Eigen::MatrixXd& Q);

  int ambient_dim() const { return static_cast<int>(b.size()); }
  double value(const Eigen::VectorXd& x) const { return c + b.dot(x) + x.dot(Q * x); }
  Eigen::VectorXd ambient_gradient(const Eigen::VectorXd& x) const { return b + 2.0 * Q * x; }
  AmbientQuadratic operator+(const AmbientQuadratic& o) const;
  AmbientQuadratic operator*(double s) const;
  /// The restriction as a jet on a sphere chart.
  PolyJet on_chart(const SphereChart& chart, const std::shared_ptr<const MonomialBasis>& basis, int tdeg) const;
};

/// u, du and Hess u of a restricted ambient quadratic in the node frame.
struct ScalarSample {
  double u = 0.0;
  Eigen::VectorXd du;
  Eigen::MatrixXd hess;
  double laplacian() const { return hess.trace(); }
};
ScalarSample sample(const AmbientQuadratic& U, const SphereNode& node, double radius);

enum class PerturbationKind { conformal_deg1, conformal_deg2, general_conformal };
const char* to_string(PerturbationKind k);

struct HarmonicPerturbation {
  PerturbationKind kind;
  AmbientQuadratic u;
  std::string label;
};

/// Fixed library of unit-coefficient conformal perturbations u for h = u g.
std::vector<HarmonicPerturbation> harmonic_library(int n);

/// A conformal metric path e^{2 phi(t)} g on the sphere.
///   exponential: phi = shift + t u
///   linear:      phi = shift + log(1 + t u) / 2, i.e. e^{2 shift}(1 + t u) g
struct ConformalPath {
  enum class Kind { exponential, linear };
  Kind kind = Kind::exponential;
  AmbientQuadratic u;
  double shift = 0.0;
};

struct ConformalSample {
  double phi = 0.0;
  Eigen::VectorXd dphi;
  Eigen::MatrixXd hess_phi;
};
/// Throws GeometryError when the linear path leaves the metric cone.
ConformalSample sample_path(const ConformalPath& p, double t, const SphereNode& node, double radius);

/// Schouten form of e^{2 phi} g in the background orthonormal frame:
/// S = S_g + (n-2)(-Hess phi + dphi dphi^T - |dphi|^2/2 I), with S_g = (n-2) lambda / 2 I.
Eigen::MatrixXd conformal_schouten(const ConformalSample& s, int n, double lambda);
/// sigma_k of e^{2 phi} g (eigenvalues taken against e^{2 phi} g).
double conformal_sigma_k(const ConformalSample& s, int n, double lambda, int k);

enum class EinsteinConvention { ric_eq_lambda_g, ric_eq_nm1_lambda_g };

/// N_1 x N_2, each factor Einstein of dimension m with the same constant,
/// carrying the metric a g_1 + b g_2.
struct ProductEinsteinModel {
  int m = 2;
  double lambda = 1.0;
  double a = 1.0;
  double b = 1.0;
  EinsteinConvention convention = EinsteinConvention::ric_eq_lambda_g;

  int dim() const { return 2 * m; }
  /// Einstein constant of each factor in the Ric_i = lambda_f g_i normalization.
  double factor_lambda() const;
  /// The path g_t = g_1/(1+t) + g_2/(1 - t + t^2/n).
  static ProductEinsteinModel counterexample(int m, double lambda, double t,
                                             EinsteinConvention c = EinsteinConvention::ric_eq_lambda_g);
};

struct ProductSpectrum {
  double mu_a = 0.0;
  double mu_b = 0.0;
  double scalar = 0.0;
};
ProductSpectrum product_schouten_spectrum(const ProductEinsteinModel& model);
double sigma_of_product(const ProductEinsteinModel& model, int k);

struct VolumeRatio {
  double closed_form = 0.0;
  double exact = 0.0;
};
/// dv_{g_t}/dv_g along the counterexample path, both from the closed form
/// (1 - (1-1/n)t^2 + t^3/n)^{-n/4} and from a^{m/2} b^{m/2}. Throws
/// ConsistencyError when they differ by more than 1e-12 relative.
VolumeRatio product_volume_ratio(int m, double t);

/// Riemann tensor of S^m x S^m (round factors, Ric_i = lambda_f g_i) at the
/// reference metric in an orthonormal frame, R_{ikjl} = kappa(d_ij d_kl - d_il d_kj)
/// within each factor.
Tensor4<double> product_riemann(const ProductEinsteinModel& model);

}  // namespace sigmalab
