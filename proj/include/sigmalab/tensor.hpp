#pragma once

#include <vector>

namespace sigmalab {

/// Dense rank-3 array over a small index range, row-major.
template <typename Scalar>
class Tensor3 {
 public:
  Tensor3() = default;
  Tensor3(int n, const Scalar& fill) : n_(n), d_(static_cast<std::size_t>(n * n * n), fill) {}
  int dim() const { return n_; }
  Scalar& operator()(int a, int b, int c) { return d_[static_cast<std::size_t>((a * n_ + b) * n_ + c)]; }
  const Scalar& operator()(int a, int b, int c) const {
    return d_[static_cast<std::size_t>((a * n_ + b) * n_ + c)];
  }

 private:
  int n_ = 0;
  std::vector<Scalar> d_;
};

/// Dense rank-4 array over a small index range, row-major.
template <typename Scalar>
class Tensor4 {
 public:
  Tensor4() = default;
  Tensor4(int n, const Scalar& fill) : n_(n), d_(static_cast<std::size_t>(n * n * n * n), fill) {}
  int dim() const { return n_; }
  Scalar& operator()(int a, int b, int c, int d) {
    return d_[static_cast<std::size_t>(((a * n_ + b) * n_ + c) * n_ + d)];
  }
  const Scalar& operator()(int a, int b, int c, int d) const {
    return d_[static_cast<std::size_t>(((a * n_ + b) * n_ + c) * n_ + d)];
  }

 private:
  int n_ = 0;
  std::vector<Scalar> d_;
};

}  // namespace sigmalab
