#pragma once

// Truncated multivariate Taylor polynomials in chart coordinates x_1..x_n and
// a deformation parameter t. Every jet carries the x-degree through which its
// coefficients are exact: products keep the smaller one, each x-derivative
// lowers it by one. Coefficients above that degree are held at zero.

#include <Eigen/Dense>

#include <array>
#include <functional>
#include <memory>
#include <vector>

namespace sigmalab {

/// Graded monomial basis in `nvars` variables up to total degree `max_deg`,
/// with precomputed product and derivative tables. Shared and immutable.
class MonomialBasis {
 public:
  struct Product {
    int a, b, c;
  };
  struct DerivTerm {
    int src, dst;
    double factor;
  };

  static std::shared_ptr<const MonomialBasis> get(int nvars, int max_deg);

  int nvars() const { return nvars_; }
  int max_deg() const { return max_deg_; }
  int size() const { return static_cast<int>(exponents_.size()); }
  const std::vector<int>& exponent(int idx) const { return exponents_[idx]; }
  int degree(int idx) const { return degrees_[idx]; }
  /// Number of monomials of total degree <= d (graded order makes this a prefix).
  int count_up_to(int d) const;
  /// Index of the monomial, or -1 when its degree exceeds max_deg.
  int index_of(const std::vector<int>& exponent) const;
  /// Products a*b = c, sorted by deg(c); `products_up_to(d)` is a prefix length.
  const std::vector<Product>& products() const { return products_; }
  int products_up_to(int d) const;
  const std::vector<DerivTerm>& derivative(int var) const { return derivs_[var]; }

  MonomialBasis(int nvars, int max_deg);

 private:
  int nvars_;
  int max_deg_;
  std::vector<std::vector<int>> exponents_;
  std::vector<int> degrees_;
  std::vector<int> degree_offsets_;
  std::vector<Product> products_;
  std::vector<int> product_offsets_;
  std::vector<std::vector<DerivTerm>> derivs_;
};

class PolyJet {
 public:
  PolyJet() = default;
  /// Zero jet, exact through x-degree `basis->max_deg()`.
  PolyJet(std::shared_ptr<const MonomialBasis> basis, int tdeg);

  static PolyJet constant(std::shared_ptr<const MonomialBasis> basis, int tdeg, double value);
  /// The chart coordinate x_var (0-based).
  static PolyJet coordinate(std::shared_ptr<const MonomialBasis> basis, int tdeg, int var);
  /// The deformation parameter t.
  static PolyJet parameter(std::shared_ptr<const MonomialBasis> basis, int tdeg);

  int nvars() const { return basis_->nvars(); }
  int tdeg() const { return tdeg_; }
  int xdeg() const { return valid_deg_; }
  const std::shared_ptr<const MonomialBasis>& basis() const { return basis_; }

  double coeff(int tpow, int mono) const { return c_[index(tpow, mono)]; }
  double& coeff(int tpow, int mono) { return c_[index(tpow, mono)]; }
  double coeff(int tpow, const std::vector<int>& exponent) const;
  void set_coeff(int tpow, const std::vector<int>& exponent, double value);

  /// Value at t = 0, x = 0.
  double value() const { return c_[0]; }
  /// Coefficient of t^p at x = 0.
  double t_coeff(int p) const { return p <= tdeg_ ? c_[index(p, 0)] : 0.0; }
  /// Restriction to x = 0 (a pure t-jet, xdeg 0).
  PolyJet at_origin() const;
  /// Truncate to a lower exact x-degree.
  PolyJet truncated(int xdeg) const;
  /// Drop every t-power above zero.
  PolyJet t_constant() const;

  /// d/dx_var; the result is exact through xdeg - 1.
  PolyJet derivative(int var) const;

  /// f(q) from the derivatives f^(m)(q(0)) for m = 0..order(); the
  /// nilpotent part is expanded as a finite power series.
  PolyJet compose(const std::vector<double>& derivatives_at_value) const;
  /// Highest power of the nilpotent part that survives truncation.
  int order() const { return valid_deg_ + tdeg_; }

  PolyJet inverse() const;
  PolyJet sqrt() const;
  PolyJet exp() const;
  PolyJet log() const;
  PolyJet sin() const;
  PolyJet cos() const;

  /// Largest coefficient magnitude.
  double max_abs() const;

  /// Evaluate the truncated polynomial at (x, t).
  double eval(const Eigen::VectorXd& x, double t) const;

  PolyJet& operator+=(const PolyJet& o);
  PolyJet& operator-=(const PolyJet& o);
  PolyJet& operator*=(double s);
  PolyJet& operator+=(double s);

  friend PolyJet operator+(PolyJet a, const PolyJet& b) { return a += b; }
  friend PolyJet operator-(PolyJet a, const PolyJet& b) { return a -= b; }
  friend PolyJet operator*(const PolyJet& a, const PolyJet& b);
  friend PolyJet operator*(PolyJet a, double s) { return a *= s; }
  friend PolyJet operator*(double s, PolyJet a) { return a *= s; }
  friend PolyJet operator+(PolyJet a, double s) { return a += s; }
  friend PolyJet operator+(double s, PolyJet a) { return a += s; }
  friend PolyJet operator-(PolyJet a, double s) { return a += -s; }
  friend PolyJet operator-(PolyJet a) { return a *= -1.0; }

 private:
  int index(int tpow, int mono) const { return tpow * basis_->size() + mono; }
  void check_compatible(const PolyJet& o) const;
  void clear_above_valid();

  std::shared_ptr<const MonomialBasis> basis_;
  int tdeg_ = 0;
  int valid_deg_ = 0;
  std::vector<double> c_;
};

/// Value and first two t-derivatives at x = 0: (q0, q1, 2 q2).
struct TDerivatives {
  double value;
  double first;
  double second;
};
TDerivatives t_derivatives(const PolyJet& q, int order = 2);

/// Square matrix of jets, row-major.
class JetMatrix {
 public:
  JetMatrix() = default;
  JetMatrix(int n, const PolyJet& fill) : n_(n), e_(static_cast<std::size_t>(n * n), fill) {}
  int dim() const { return n_; }
  PolyJet& operator()(int i, int j) { return e_[static_cast<std::size_t>(i * n_ + j)]; }
  const PolyJet& operator()(int i, int j) const { return e_[static_cast<std::size_t>(i * n_ + j)]; }
  Eigen::MatrixXd value() const;
  Eigen::MatrixXd t_coeff(int p) const;

 private:
  int n_ = 0;
  std::vector<PolyJet> e_;
};

JetMatrix operator*(const JetMatrix& a, const JetMatrix& b);
JetMatrix operator*(const Eigen::MatrixXd& a, const JetMatrix& b);
JetMatrix operator*(const JetMatrix& a, const Eigen::MatrixXd& b);
JetMatrix operator+(const JetMatrix& a, const JetMatrix& b);

/// Inverse of a jet matrix by the Neumann series of its nilpotent part around
/// the exact inverse of the constant term. Throws GeometryError when the
/// constant term is singular.
JetMatrix neumann_inverse(const JetMatrix& g);

}  // namespace sigmalab
