#include "sigmalab/symalg.hpp"

#include <string>

namespace sigmalab {

void IndexTuple::validate(int n) const {
  if (upper.size() != lower.size()) {
    throw DomainError("IndexTuple: upper and lower lengths differ");
  }
  for (int v : upper)
    if (v < 1 || v > n) throw DomainError("IndexTuple: index out of range 1.." + std::to_string(n));
  for (int v : lower)
    if (v < 1 || v > n) throw DomainError("IndexTuple: index out of range 1.." + std::to_string(n));
}

namespace {

int inversion_parity(const std::vector<int>& v) {
  int inversions = 0;
  for (std::size_t a = 0; a < v.size(); ++a)
    for (std::size_t b = a + 1; b < v.size(); ++b)
      if (v[a] > v[b]) ++inversions;
  return inversions & 1;
}

}  // namespace

int gen_kron_delta(const IndexTuple& t) {
  if (t.upper.size() != t.lower.size()) {
    throw DomainError("gen_kron_delta: upper and lower lengths differ");
  }
  for (int v : t.upper)
    if (v < 1) throw DomainError("gen_kron_delta: indices are 1-based");
  for (int v : t.lower)
    if (v < 1) throw DomainError("gen_kron_delta: indices are 1-based");

  std::vector<int> su = t.upper;
  std::vector<int> sl = t.lower;
  std::sort(su.begin(), su.end());
  std::sort(sl.begin(), sl.end());
  if (std::adjacent_find(su.begin(), su.end()) != su.end()) return 0;
  if (su != sl) return 0;
  // Sign of the permutation carrying lower onto upper.
  return (inversion_parity(t.upper) ^ inversion_parity(t.lower)) ? -1 : 1;
}

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return std::round(r);
}

bool contraction_rule_check(int p, int k, int n) {
  if (p < 1 || !(p < k) || k > n || n > 5) {
    throw DomainError("contraction_rule_check: need 1 <= p < k <= n <= 5");
  }
  double factor = 1.0;
  for (int m = 2; m <= p; ++m) factor *= m;
  for (int m = n - k + 1; m <= n - k + p; ++m) factor *= m;

  const int free_len = k - p;
  std::vector<int> upper(static_cast<std::size_t>(k));
  std::vector<int> lower(static_cast<std::size_t>(k));
  std::vector<int> up_p(static_cast<std::size_t>(p));
  std::vector<int> lo_p(static_cast<std::size_t>(p));
  std::vector<int> up_f(static_cast<std::size_t>(free_len));
  std::vector<int> lo_f(static_cast<std::size_t>(free_len));

  // Odometer over 2*len indices in 1..n.
  auto advance = [n](std::vector<int>& v) {
    for (int pos = static_cast<int>(v.size()) - 1; pos >= 0; --pos) {
      if (++v[pos] <= n) return true;
      v[pos] = 1;
    }
    return false;
  };

  std::vector<int> free_idx(static_cast<std::size_t>(2 * free_len), 1);
  do {
    for (int a = 0; a < free_len; ++a) {
      up_f[a] = free_idx[a];
      lo_f[a] = free_idx[free_len + a];
      upper[p + a] = up_f[a];
      lower[p + a] = lo_f[a];
    }
    long long lhs = 0;
    std::vector<int> summed(static_cast<std::size_t>(2 * p), 1);
    do {
      for (int a = 0; a < p; ++a) {
        up_p[a] = summed[a];
        lo_p[a] = summed[p + a];
        upper[a] = up_p[a];
        lower[a] = lo_p[a];
      }
      const int d1 = gen_kron_delta(IndexTuple{up_p, lo_p});
      if (d1 == 0) continue;
      lhs += d1 * gen_kron_delta(IndexTuple{upper, lower});
    } while (advance(summed));
    const double rhs = factor * gen_kron_delta(IndexTuple{up_f, lo_f});
    if (static_cast<double>(lhs) != rhs) return false;
  } while (advance(free_idx));
  return true;
}

}  // namespace sigmalab
