#pragma once

// Multilinear algebra on small symmetric endomorphisms: elementary symmetric
// polynomials, a cyclic Jacobi eigenvalue solver and generalized Kronecker
// delta contractions. Two independent routes to sigma_k live here:
// elem_sym(eigenvalues(S), k) and sigma_via_delta(S, k).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>
#include <vector>

#include "sigmalab/errors.hpp"

namespace sigmalab {

/// All elementary symmetric polynomials e_0..e_n of the entries of `values`.
/// Works for any scalar type closed under + and *, including jets.
template <typename T>
std::vector<T> elem_sym_all(const std::vector<T>& values, const T& one, const T& zero) {
  const auto n = values.size();
  std::vector<T> e(n + 1, zero);
  e[0] = one;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j >= 1; --j) {
      e[j] = e[j] + e[j - 1] * values[i];
    }
  }
  return e;
}

/// k-th elementary symmetric polynomial of the eigenvalue list; e_0 = 1.
template <typename Derived>
typename Derived::Scalar elem_sym(const Eigen::MatrixBase<Derived>& evals, int k) {
  using Scalar = typename Derived::Scalar;
  const int n = static_cast<int>(evals.size());
  if (k < 0 || k > n) {
    throw DomainError("elem_sym: k must lie in 0..n");
  }
  // e[j] after processing i values; in-place descending update.
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> e = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(n + 1);
  e(0) = Scalar(1);
  for (int i = 0; i < n; ++i) {
    for (int j = std::min(i + 1, k); j >= 1; --j) {
      e(j) += e(j - 1) * evals(i);
    }
  }
  return e(k);
}

inline double elem_sym(const std::vector<double>& evals, int k) {
  return elem_sym(Eigen::Map<const Eigen::VectorXd>(evals.data(), static_cast<Eigen::Index>(evals.size())), k);
}

/// Eigenvalues (ascending) of a real symmetric matrix by cyclic Jacobi rotations.
/// The input is symmetrized first; iteration stops once the off-diagonal
/// Frobenius norm drops below `tol` times max(1, ||A||_F).
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> jacobi_eigenvalues(
    const Eigen::MatrixBase<Derived>& input, typename Derived::Scalar tol = 1e-12) {
  using Scalar = typename Derived::Scalar;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (input.rows() != input.cols()) {
    throw DomainError("jacobi_eigenvalues: matrix must be square");
  }
  Matrix a = Scalar(0.5) * (input + input.transpose());
  const Eigen::Index n = a.rows();
  const Scalar scale = std::max(Scalar(1), a.norm());

  auto off_norm = [&]() {
    Scalar s = 0;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        if (i != j) s += a(i, j) * a(i, j);
    return std::sqrt(s);
  };

  for (int sweep = 0; sweep < 100 && off_norm() > tol * scale; ++sweep) {
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const Scalar apq = a(p, q);
        if (apq == Scalar(0)) continue;
        const Scalar theta = (a(q, q) - a(p, p)) / (Scalar(2) * apq);
        const Scalar t = (theta >= 0 ? Scalar(1) : Scalar(-1)) /
                         (std::abs(theta) + std::sqrt(theta * theta + Scalar(1)));
        const Scalar c = Scalar(1) / std::sqrt(t * t + Scalar(1));
        const Scalar s = t * c;
        // A <- J^T A J with the rotation acting on rows/cols p, q.
        for (Eigen::Index r = 0; r < n; ++r) {
          const Scalar arp = a(r, p);
          const Scalar arq = a(r, q);
          a(r, p) = c * arp - s * arq;
          a(r, q) = s * arp + c * arq;
        }
        for (Eigen::Index r = 0; r < n; ++r) {
          const Scalar apr = a(p, r);
          const Scalar aqr = a(q, r);
          a(p, r) = c * apr - s * aqr;
          a(q, r) = s * apr + c * aqr;
        }
      }
    }
  }
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> evals = a.diagonal();
  std::sort(evals.data(), evals.data() + evals.size());
  return evals;
}

/// Mixed tensor S^i_j of a symmetric bilinear form against a metric.
/// Stores the mixed matrix plus a symmetric matrix similar to it
/// (L^{-1} S L^{-T} with metric = L L^T), which carries the eigenvalues.
template <typename Scalar>
class SymEndo {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  /// Entries given in an orthonormal frame; must be symmetric.
  static SymEndo orthonormal(const Matrix& s, Scalar sym_tol = Scalar(1e-12)) {
    check_shape(s);
    const Scalar asym = (s - s.transpose()).cwiseAbs().maxCoeff();
    if (asym > sym_tol * std::max(Scalar(1), s.cwiseAbs().maxCoeff())) {
      throw DomainError("SymEndo: orthonormal-frame entries are not symmetric");
    }
    return SymEndo(s, Scalar(0.5) * (s + s.transpose()));
  }

  /// S^i_j = g^{ip} S_pj for a symmetric form S_pj and positive-definite metric g.
  static SymEndo from_bilinear(const Matrix& form, const Matrix& metric) {
    check_shape(form);
    if (metric.rows() != form.rows() || metric.cols() != form.cols()) {
      throw DomainError("SymEndo: metric and form dimensions differ");
    }
    Eigen::LLT<Matrix> llt(Scalar(0.5) * (metric + metric.transpose()));
    if (llt.info() != Eigen::Success) {
      throw GeometryError("SymEndo: metric is not positive definite");
    }
    const Matrix sym_form = Scalar(0.5) * (form + form.transpose());
    const Matrix l = llt.matrixL();
    const Matrix linv = l.inverse();
    Matrix similar = linv * sym_form * linv.transpose();
    Matrix mixed = llt.solve(sym_form);
    return SymEndo(std::move(mixed), Scalar(0.5) * (similar + similar.transpose()));
  }

  int dim() const { return static_cast<int>(mixed_.rows()); }
  const Matrix& mixed() const { return mixed_; }
  Vector eigenvalues() const { return jacobi_eigenvalues(symmetric_); }

 private:
  SymEndo(Matrix mixed, Matrix symmetric) : mixed_(std::move(mixed)), symmetric_(std::move(symmetric)) {}

  static void check_shape(const Matrix& s) {
    if (s.rows() != s.cols() || s.rows() < 2) {
      throw DomainError("SymEndo: need a square matrix of dimension >= 2");
    }
  }

  Matrix mixed_;
  Matrix symmetric_;
};

/// Index pattern of a generalized Kronecker delta; indices are 1-based.
struct IndexTuple {
  std::vector<int> upper;
  std::vector<int> lower;

  void validate(int n) const;
};

/// +1 / -1 when the upper indices are distinct and an even / odd permutation
/// of the lower ones, 0 otherwise.
int gen_kron_delta(const IndexTuple& t);

/// Largest dimension accepted by the delta-contraction route.
inline constexpr int kMaxDeltaDim = 6;

/// (1/k!) delta^{j_1..j_k}_{i_1..i_k} S^{i_1}_{j_1} ... S^{i_k}_{j_k}, with
/// `entry(i, j)` returning S^i_j (0-based). Only distinct i-tuples are
/// enumerated; for each, j runs over the permutations of i.
template <typename T, typename Entry>
T delta_contraction(int n, int k, Entry&& entry, const T& zero) {
  if (k < 1 || k > n) {
    throw DomainError("sigma_via_delta: k must lie in 1..n");
  }
  if (n > kMaxDeltaDim) {
    throw CapabilityError("sigma_via_delta: n > 6 is too large for the delta route; use elem_sym of eigenvalues");
  }
  T total = zero;
  double k_factorial = 1.0;
  for (int m = 2; m <= k; ++m) k_factorial *= m;

  std::vector<int> lower(static_cast<std::size_t>(k));
  std::vector<int> upper(static_cast<std::size_t>(k));
  std::vector<int> perm(static_cast<std::size_t>(k));
  // Odometer over ordered tuples of distinct indices.
  std::vector<int> idx(static_cast<std::size_t>(k), 0);
  while (true) {
    bool distinct = true;
    for (int a = 0; a < k && distinct; ++a)
      for (int b = a + 1; b < k; ++b)
        if (idx[a] == idx[b]) {
          distinct = false;
          break;
        }
    if (distinct) {
      std::iota(perm.begin(), perm.end(), 0);
      for (int a = 0; a < k; ++a) lower[a] = idx[a] + 1;
      do {
        for (int a = 0; a < k; ++a) upper[a] = idx[perm[a]] + 1;
        const int sign = gen_kron_delta(IndexTuple{upper, lower});
        T term = entry(idx[0], idx[perm[0]]);
        for (int a = 1; a < k; ++a) term = term * entry(idx[a], idx[perm[a]]);
        total = sign > 0 ? total + term : total - term;
      } while (std::next_permutation(perm.begin(), perm.end()));
    }
    int pos = k - 1;
    while (pos >= 0 && ++idx[pos] == n) {
      idx[pos] = 0;
      --pos;
    }
    if (pos < 0) break;
  }
  return total * (1.0 / k_factorial);
}

/// sigma_k of a mixed endomorphism via the Kronecker-delta contraction.
template <typename Scalar>
Scalar sigma_via_delta(const SymEndo<Scalar>& s, int k) {
  const auto& m = s.mixed();
  return delta_contraction<Scalar>(s.dim(), k, [&](int i, int j) { return m(i, j); }, Scalar(0));
}

/// sigma_k via eigenvalues.
template <typename Scalar>
Scalar sigma_via_eigen(const SymEndo<Scalar>& s, int k) {
  return elem_sym(s.eigenvalues(), k);
}

/// Brute-force check of the contraction rule
///   delta^{j_1..j_p}_{i_1..i_p} delta^{j_1..j_k}_{i_1..i_k}
///     = p! (n-k+p)!/(n-k)! delta^{j_{p+1}..j_k}_{i_{p+1}..i_k}
/// over every free-index assignment. Requires 1 <= p < k <= n <= 5.
bool contraction_rule_check(int p, int k, int n);

double binomial(int n, int k);

}  // namespace sigmalab
