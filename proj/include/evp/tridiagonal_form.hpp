#pragma once

#include "evp/matrix.hpp"

namespace evp {

/// Symmetric tridiagonal matrix kept as its diagonal (n) and subdiagonal (n-1).
template <typename Scalar>
struct TridiagonalForm {
  Vector<Scalar> d;
  Vector<Scalar> e;

  Index order() const noexcept { return d.size(); }

  Matrix<Scalar> to_dense() const {
    const Index n = d.size();
    Matrix<Scalar> t = Matrix<Scalar>::Zero(n, n);
    for (Index i = 0; i < n; ++i) t(i, i) = d[i];
    for (Index i = 0; i + 1 < n; ++i) t(i + 1, i) = t(i, i + 1) = e[i];
    return t;
  }
};

}  // namespace evp
