#include "sigmalab/polyjet.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

#include "sigmalab/errors.hpp"

namespace sigmalab {

namespace {

void compositions(int nvars, int total, std::vector<int>& cur, int pos, std::vector<std::vector<int>>& out) {
  if (pos == nvars - 1) {
    cur[pos] = total;
    out.push_back(cur);
    return;
  }
  for (int v = total; v >= 0; --v) {
    cur[pos] = v;
    compositions(nvars, total - v, cur, pos + 1, out);
  }
}

}  // namespace

MonomialBasis::MonomialBasis(int nvars, int max_deg) : nvars_(nvars), max_deg_(max_deg) {
  if (nvars < 1 || max_deg < 0) {
    throw DomainError("MonomialBasis: need nvars >= 1 and max_deg >= 0");
  }
  for (int d = 0; d <= max_deg; ++d) {
    degree_offsets_.push_back(static_cast<int>(exponents_.size()));
    std::vector<int> cur(static_cast<std::size_t>(nvars), 0);
    compositions(nvars, d, cur, 0, exponents_);
  }
  degree_offsets_.push_back(static_cast<int>(exponents_.size()));
  for (const auto& e : exponents_) {
    int d = 0;
    for (int v : e) d += v;
    degrees_.push_back(d);
  }

  std::vector<std::vector<Product>> by_degree(static_cast<std::size_t>(max_deg + 1));
  std::vector<int> sum(static_cast<std::size_t>(nvars));
  for (int a = 0; a < size(); ++a) {
    for (int b = 0; b < size(); ++b) {
      if (degrees_[a] + degrees_[b] > max_deg) continue;
      for (int v = 0; v < nvars; ++v) sum[v] = exponents_[a][v] + exponents_[b][v];
      by_degree[degrees_[a] + degrees_[b]].push_back({a, b, index_of(sum)});
    }
  }
  for (const auto& group : by_degree) {
    product_offsets_.push_back(static_cast<int>(products_.size()));
    products_.insert(products_.end(), group.begin(), group.end());
  }
  product_offsets_.push_back(static_cast<int>(products_.size()));

  derivs_.resize(static_cast<std::size_t>(nvars));
  for (int v = 0; v < nvars; ++v) {
    for (int m = 0; m < size(); ++m) {
      const auto& e = exponents_[m];
      if (e[v] == 0) continue;
      auto lowered = e;
      --lowered[v];
      derivs_[v].push_back({m, index_of(lowered), static_cast<double>(e[v])});
    }
  }
}

std::shared_ptr<const MonomialBasis> MonomialBasis::get(int nvars, int max_deg) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::shared_ptr<const MonomialBasis>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[{nvars, max_deg}];
  if (!slot) slot = std::make_shared<const MonomialBasis>(nvars, max_deg);
  return slot;
}

int MonomialBasis::count_up_to(int d) const {
  d = std::clamp(d, -1, max_deg_);
  return degree_offsets_[static_cast<std::size_t>(d + 1)];
}

int MonomialBasis::products_up_to(int d) const {
  d = std::clamp(d, -1, max_deg_);
  return product_offsets_[static_cast<std::size_t>(d + 1)];
}

int MonomialBasis::index_of(const std::vector<int>& exponent) const {
  if (static_cast<int>(exponent.size()) != nvars_) return -1;
  int d = 0;
  for (int v : exponent) {
    if (v < 0) return -1;
    d += v;
  }
  if (d > max_deg_) return -1;
  // Graded reverse-lex within each degree: linear scan of the degree block.
  for (int i = degree_offsets_[d]; i < degree_offsets_[d + 1]; ++i) {
    if (exponents_[i] == exponent) return i;
  }
  return -1;
}

PolyJet::PolyJet(std::shared_ptr<const MonomialBasis> basis, int tdeg)
    : basis_(std::move(basis)), tdeg_(tdeg), valid_deg_(basis_->max_deg()) {
  if (tdeg < 0) throw DomainError("PolyJet: negative t-degree");
  c_.assign(static_cast<std::size_t>((tdeg + 1) * basis_->size()), 0.0);
}

PolyJet PolyJet::constant(std::shared_ptr<const MonomialBasis> basis, int tdeg, double value) {
  PolyJet j(std::move(basis), tdeg);
  j.c_[0] = value;
  return j;
}

PolyJet PolyJet::coordinate(std::shared_ptr<const MonomialBasis> basis, int tdeg, int var) {
  PolyJet j(basis, tdeg);
  if (var < 0 || var >= basis->nvars()) throw DomainError("PolyJet::coordinate: variable out of range");
  if (basis->max_deg() >= 1) {
    std::vector<int> e(static_cast<std::size_t>(basis->nvars()), 0);
    e[var] = 1;
    j.c_[j.index(0, basis->index_of(e))] = 1.0;
  }
  return j;
}

PolyJet PolyJet::parameter(std::shared_ptr<const MonomialBasis> basis, int tdeg) {
  PolyJet j(std::move(basis), tdeg);
  if (tdeg >= 1) j.c_[j.index(1, 0)] = 1.0;
  return j;
}

double PolyJet::coeff(int tpow, const std::vector<int>& exponent) const {
  const int m = basis_->index_of(exponent);
  if (m < 0 || tpow < 0 || tpow > tdeg_) return 0.0;
  return c_[index(tpow, m)];
}

void PolyJet::set_coeff(int tpow, const std::vector<int>& exponent, double value) {
  const int m = basis_->index_of(exponent);
  if (m < 0 || tpow < 0 || tpow > tdeg_) throw DomainError("PolyJet::set_coeff: outside truncation");
  if (basis_->degree(m) > valid_deg_) return;
  c_[index(tpow, m)] = value;
}

void PolyJet::check_compatible(const PolyJet& o) const {
  if (basis_ != o.basis_ || tdeg_ != o.tdeg_) {
    throw DomainError("PolyJet: operands live in different jet spaces");
  }
}

void PolyJet::clear_above_valid() {
  const int keep = basis_->count_up_to(valid_deg_);
  const int sz = basis_->size();
  for (int p = 0; p <= tdeg_; ++p)
    for (int m = keep; m < sz; ++m) c_[index(p, m)] = 0.0;
}

PolyJet PolyJet::at_origin() const { return truncated(0); }

PolyJet PolyJet::truncated(int xdeg) const {
  PolyJet r = *this;
  r.valid_deg_ = std::min(valid_deg_, std::max(xdeg, 0));
  r.clear_above_valid();
  return r;
}

PolyJet PolyJet::t_constant() const {
  PolyJet r = *this;
  const int sz = basis_->size();
  for (int p = 1; p <= tdeg_; ++p)
    for (int m = 0; m < sz; ++m) r.c_[index(p, m)] = 0.0;
  return r;
}

PolyJet PolyJet::derivative(int var) const {
  if (var < 0 || var >= nvars()) throw DomainError("PolyJet::derivative: variable out of range");
  if (valid_deg_ < 1) throw CapabilityError("PolyJet::derivative: jet has no exact x-degree left to differentiate");
  PolyJet r(basis_, tdeg_);
  r.valid_deg_ = valid_deg_ - 1;
  for (const auto& term : basis_->derivative(var)) {
    if (basis_->degree(term.dst) > r.valid_deg_) continue;
    for (int p = 0; p <= tdeg_; ++p) r.c_[r.index(p, term.dst)] += term.factor * c_[index(p, term.src)];
  }
  return r;
}

PolyJet PolyJet::compose(const std::vector<double>& derivs) const {
  const int order_needed = order();
  PolyJet nil = *this;
  nil.c_[0] = 0.0;
  PolyJet result = PolyJet::constant(basis_, tdeg_, derivs.empty() ? 0.0 : derivs[0]);
  result.valid_deg_ = valid_deg_;
  PolyJet power = nil;
  double factorial = 1.0;
  for (int m = 1; m <= order_needed && m < static_cast<int>(derivs.size()); ++m) {
    factorial *= m;
    result += power * (derivs[m] / factorial);
    power = power * nil;
  }
  return result;
}

PolyJet PolyJet::inverse() const {
  const double c = value();
  if (c == 0.0) throw GeometryError("PolyJet::inverse: zero constant term");
  std::vector<double> d(static_cast<std::size_t>(order() + 1));
  double fact = 1.0;
  for (int m = 0; m <= order(); ++m) {
    if (m > 0) fact *= m;
    d[m] = ((m % 2) ? -1.0 : 1.0) * fact / std::pow(c, m + 1);
  }
  return compose(d);
}

PolyJet PolyJet::sqrt() const {
  const double c = value();
  if (c <= 0.0) throw GeometryError("PolyJet::sqrt: non-positive constant term");
  std::vector<double> d(static_cast<std::size_t>(order() + 1));
  double coef = 1.0;
  for (int m = 0; m <= order(); ++m) {
    d[m] = coef * std::pow(c, 0.5 - m);
    coef *= (0.5 - m);
  }
  return compose(d);
}

PolyJet PolyJet::exp() const {
  return compose(std::vector<double>(static_cast<std::size_t>(order() + 1), std::exp(value())));
}

PolyJet PolyJet::log() const {
  const double c = value();
  if (c <= 0.0) throw GeometryError("PolyJet::log: non-positive constant term");
  std::vector<double> d(static_cast<std::size_t>(order() + 1));
  d[0] = std::log(c);
  double fact = 1.0;
  for (int m = 1; m <= order(); ++m) {
    if (m > 1) fact *= (m - 1);
    d[m] = ((m % 2) ? 1.0 : -1.0) * fact / std::pow(c, m);
  }
  return compose(d);
}

PolyJet PolyJet::sin() const {
  const double s = std::sin(value());
  const double co = std::cos(value());
  const double cycle[4] = {s, co, -s, -co};
  std::vector<double> d(static_cast<std::size_t>(order() + 1));
  for (int m = 0; m <= order(); ++m) d[m] = cycle[m % 4];
  return compose(d);
}

PolyJet PolyJet::cos() const {
  const double s = std::sin(value());
  const double co = std::cos(value());
  const double cycle[4] = {co, -s, -co, s};
  std::vector<double> d(static_cast<std::size_t>(order() + 1));
  for (int m = 0; m <= order(); ++m) d[m] = cycle[m % 4];
  return compose(d);
}

double PolyJet::max_abs() const {
  double m = 0.0;
  for (double v : c_) m = std::max(m, std::abs(v));
  return m;
}

double PolyJet::eval(const Eigen::VectorXd& x, double t) const {
  if (x.size() != nvars()) throw DomainError("PolyJet::eval: dimension mismatch");
  double total = 0.0;
  const int keep = basis_->count_up_to(valid_deg_);
  for (int m = 0; m < keep; ++m) {
    double mono = 1.0;
    const auto& e = basis_->exponent(m);
    for (int v = 0; v < nvars(); ++v) mono *= std::pow(x(v), e[v]);
    double tpoly = 0.0;
    double tp = 1.0;
    for (int p = 0; p <= tdeg_; ++p) {
      tpoly += c_[index(p, m)] * tp;
      tp *= t;
    }
    total += mono * tpoly;
  }
  return total;
}

PolyJet& PolyJet::operator+=(const PolyJet& o) {
  check_compatible(o);
  for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
  if (o.valid_deg_ < valid_deg_) {
    valid_deg_ = o.valid_deg_;
    clear_above_valid();
  }
  return *this;
}

PolyJet& PolyJet::operator-=(const PolyJet& o) {
  check_compatible(o);
  for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
  if (o.valid_deg_ < valid_deg_) {
    valid_deg_ = o.valid_deg_;
    clear_above_valid();
  }
  return *this;
}

PolyJet& PolyJet::operator*=(double s) {
  for (double& v : c_) v *= s;
  return *this;
}

PolyJet& PolyJet::operator+=(double s) {
  c_[0] += s;
  return *this;
}

PolyJet operator*(const PolyJet& a, const PolyJet& b) {
  a.check_compatible(b);
  PolyJet r(a.basis_, a.tdeg_);
  r.valid_deg_ = std::min(a.valid_deg_, b.valid_deg_);
  const auto& prods = a.basis_->products();
  const int npairs = a.basis_->products_up_to(r.valid_deg_);
  const int sz = a.basis_->size();
  for (int ta = 0; ta <= a.tdeg_; ++ta) {
    const double* ca = a.c_.data() + ta * sz;
    for (int tb = 0; ta + tb <= a.tdeg_; ++tb) {
      const double* cb = b.c_.data() + tb * sz;
      double* cr = r.c_.data() + (ta + tb) * sz;
      for (int i = 0; i < npairs; ++i) {
        const auto& pr = prods[i];
        cr[pr.c] += ca[pr.a] * cb[pr.b];
      }
    }
  }
  return r;
}

TDerivatives t_derivatives(const PolyJet& q, int order) {
  if (order > q.tdeg()) {
    throw CapabilityError("t_derivatives: requested order exceeds the jet's t-degree");
  }
  return {q.t_coeff(0), order >= 1 ? q.t_coeff(1) : 0.0, order >= 2 ? 2.0 * q.t_coeff(2) : 0.0};
}

Eigen::MatrixXd JetMatrix::value() const {
  Eigen::MatrixXd m(n_, n_);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) m(i, j) = (*this)(i, j).value();
  return m;
}

Eigen::MatrixXd JetMatrix::t_coeff(int p) const {
  Eigen::MatrixXd m(n_, n_);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) m(i, j) = (*this)(i, j).t_coeff(p);
  return m;
}

JetMatrix operator*(const JetMatrix& a, const JetMatrix& b) {
  const int n = a.dim();
  JetMatrix r(n, a(0, 0) * 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      PolyJet s = a(i, 0) * b(0, j);
      for (int k = 1; k < n; ++k) s += a(i, k) * b(k, j);
      r(i, j) = std::move(s);
    }
  return r;
}

JetMatrix operator*(const Eigen::MatrixXd& a, const JetMatrix& b) {
  const int n = b.dim();
  JetMatrix r(n, b(0, 0) * 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      PolyJet s = b(0, j) * a(i, 0);
      for (int k = 1; k < n; ++k) s += b(k, j) * a(i, k);
      r(i, j) = std::move(s);
    }
  return r;
}

JetMatrix operator*(const JetMatrix& a, const Eigen::MatrixXd& b) {
  const int n = a.dim();
  JetMatrix r(n, a(0, 0) * 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      PolyJet s = a(i, 0) * b(0, j);
      for (int k = 1; k < n; ++k) s += a(i, k) * b(k, j);
      r(i, j) = std::move(s);
    }
  return r;
}

JetMatrix operator+(const JetMatrix& a, const JetMatrix& b) {
  const int n = a.dim();
  JetMatrix r = a;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) r(i, j) += b(i, j);
  return r;
}

JetMatrix neumann_inverse(const JetMatrix& g) {
  const int n = g.dim();
  const Eigen::MatrixXd g0 = g.value();
  Eigen::FullPivLU<Eigen::MatrixXd> lu(g0);
  if (!lu.isInvertible()) throw GeometryError("neumann_inverse: constant term is singular");
  const Eigen::MatrixXd g0inv = lu.inverse();

  JetMatrix nil = g;
  int order = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      nil(i, j) += -g0(i, j);
      order = std::max(order, nil(i, j).order());
    }
  // g^{-1} = sum_m (-g0^{-1} P)^m g0^{-1}
  const JetMatrix step = (-g0inv) * nil;
  JetMatrix term = step * g0inv;
  JetMatrix inv(n, g(0, 0) * 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) inv(i, j) += g0inv(i, j);
  for (int m = 1; m <= order; ++m) {
    inv = inv + term;
    if (m < order) term = step * term;
  }
  return inv;
}

}  // namespace sigmalab
