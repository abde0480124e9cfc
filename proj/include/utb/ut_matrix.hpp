#pragma once

#include <utility>
#include <vector>

#include "utb/error.hpp"

namespace utb {

// Upper-triangular n x n matrix over a field-like Scalar. Only the upper
// triangle (diagonal included) is stored, row-major. Scalar provides + - *,
// and free functions zero_like, one_like, inverse, is_zero, is_one.
template <class Scalar>
class UTMatrix {
 public:
  UTMatrix() = default;
  UTMatrix(int n, const Scalar& zero) : n_(n), a_(static_cast<std::size_t>(n * (n + 1) / 2), zero) {}

  static UTMatrix identity(int n, const Scalar& like) {
    UTMatrix m(n, zero_like(like));
    for (int i = 0; i < n; ++i) m(i, i) = one_like(like);
    return m;
  }

  int size() const { return n_; }
  Scalar& operator()(int i, int j) { return a_[index(i, j)]; }
  const Scalar& operator()(int i, int j) const { return a_[index(i, j)]; }
  const std::vector<Scalar>& data() const { return a_; }

  UTMatrix operator*(const UTMatrix& o) const {
    if (o.n_ != n_) throw Error(ErrorKind::ArityMismatch, "matrix sizes differ");
    UTMatrix r(n_, zero_like(a_[0]));
    for (int i = 0; i < n_; ++i) {
      for (int j = i; j < n_; ++j) {
        Scalar s = (*this)(i, i) * o(i, j);
        for (int k = i + 1; k <= j; ++k) s = s + (*this)(i, k) * o(k, j);
        r(i, j) = s;
      }
    }
    return r;
  }

  // back substitution; throws DivisionByZero on a singular diagonal
  UTMatrix inverse() const {
    UTMatrix r(n_, zero_like(a_[0]));
    for (int i = n_ - 1; i >= 0; --i) {
      if (is_zero((*this)(i, i))) throw Error(ErrorKind::DivisionByZero, "singular diagonal entry");
      Scalar d = utb::inverse((*this)(i, i));
      r(i, i) = d;
      for (int j = i + 1; j < n_; ++j) {
        Scalar s = zero_like(d);
        for (int k = i + 1; k <= j; ++k) s = s + (*this)(i, k) * r(k, j);
        r(i, j) = zero_like(d) - d * s;
      }
    }
    return r;
  }

  bool is_unipotent() const {
    for (int i = 0; i < n_; ++i)
      if (!is_one((*this)(i, i))) return false;
    return true;
  }

  bool is_identity() const {
    for (int i = 0; i < n_; ++i)
      for (int j = i; j < n_; ++j)
        if (i == j ? !is_one((*this)(i, j)) : !is_zero((*this)(i, j))) return false;
    return true;
  }

  bool is_diagonal() const {
    for (int i = 0; i < n_; ++i)
      for (int j = i + 1; j < n_; ++j)
        if (!is_zero((*this)(i, j))) return false;
    return true;
  }

  bool operator==(const UTMatrix& o) const { return n_ == o.n_ && a_ == o.a_; }

  template <class F>
  auto map(F&& f) const {
    using T = decltype(f(std::declval<const Scalar&>()));
    std::vector<T> out;
    out.reserve(a_.size());
    for (const auto& x : a_) out.push_back(f(x));
    UTMatrix<T> m;
    m.assign(n_, std::move(out));
    return m;
  }

  void assign(int n, std::vector<Scalar> a) {
    n_ = n;
    a_ = std::move(a);
  }

 private:
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(i * n_ - i * (i - 1) / 2 + (j - i));
  }
  int n_ = 0;
  std::vector<Scalar> a_;
};

}  // namespace utb
