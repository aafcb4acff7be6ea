#pragma once

#include <utility>

#include "evp/matrix.hpp"

namespace evp {

/// Lower-triangular Cholesky factor L (B = L L^T), or its inverse once
/// `inverted` is set. The strictly upper part is exactly zero.
template <typename Scalar>
struct CholeskyFactor {
  Matrix<Scalar> l;
  bool inverted = false;

  Index order() const noexcept { return l.rows(); }
};

/// Right-looking Cholesky factorization computed in place over b's lower
/// triangle. Panels of `block` columns are factored, then the trailing
/// matrix receives their update column by column. A pivot that is not
/// strictly positive throws NotPositiveDefinite with its 1-based column.
template <typename Scalar>
CholeskyFactor<Scalar> cholesky_factor(Matrix<Scalar> b, Index block = 64) {
  detail::require_square(b, "cholesky_factor: B");
  if (block < 1) throw ArgumentError("cholesky_factor: block must be >= 1");
  const Index n = b.rows();
  for (Index k0 = 0; k0 < n; k0 += block) {
    const Index k1 = std::min(n, k0 + block);
    for (Index j = k0; j < k1; ++j) {
      Scalar* bj = b.col(j).data();
      if (!(bj[j] > 0) || !std::isfinite(bj[j])) throw NotPositiveDefinite(j + 1);
      const Scalar ljj = std::sqrt(bj[j]);
      bj[j] = ljj;
      for (Index i = j + 1; i < n; ++i) bj[i] /= ljj;
      for (Index c = j + 1; c < k1; ++c) {
        Scalar* bc = b.col(c).data();
        const Scalar f = bj[c];
        for (Index i = c; i < n; ++i) bc[i] -= bj[i] * f;
      }
    }
#pragma omp parallel for schedule(static) if ((n - k1) * (n - k1) * (k1 - k0) > 500000)
    for (Index c = k1; c < n; ++c) {
      Scalar* bc = b.col(c).data();
      for (Index j = k0; j < k1; ++j) {
        const Scalar* bj = b.col(j).data();
        const Scalar f = bj[c];
        for (Index i = c; i < n; ++i) bc[i] -= bj[i] * f;
      }
    }
  }
  for (Index j = 1; j < n; ++j) b.col(j).head(j).setZero();
  flops::add(static_cast<std::uint64_t>(n) * n * n / 3);
  return {std::move(b), false};
}

/// Replaces L by L^{-1} in place (column-wise, trailing columns first).
template <typename Scalar>
CholeskyFactor<Scalar> invert_triangular(CholeskyFactor<Scalar> f) {
  if (f.inverted) throw ArgumentError("invert_triangular: factor is already inverted");
  auto& l = f.l;
  const Index n = l.rows();
  for (Index j = n - 1; j >= 0; --j) {
    if (!(l(j, j) > 0)) throw SingularFactor(j + 1);
    l(j, j) = Scalar(1) / l(j, j);
    const Scalar ajj = -l(j, j);
    Scalar* x = l.col(j).data();
    // x[j+1:n) <- Linv[j+1:n, j+1:n) * x[j+1:n), in place
    for (Index k = n - 1; k > j; --k) {
      const Scalar xk = x[k];
      const Scalar* lk = l.col(k).data();
      for (Index i = k + 1; i < n; ++i) x[i] += lk[i] * xk;
      x[k] = xk * lk[k];
    }
    for (Index i = j + 1; i < n; ++i) x[i] *= ajj;
  }
  f.inverted = true;
  flops::add(static_cast<std::uint64_t>(n) * n * n / 3);
  return f;
}

/// A~ = L^{-1} A L^{-T}, explicitly symmetrized.
template <typename Scalar>
Matrix<Scalar> reduce_to_standard(const Matrix<Scalar>& a, const CholeskyFactor<Scalar>& linv) {
  if (!linv.inverted) throw ArgumentError("reduce_to_standard: factor must hold L^{-1}");
  if (a.rows() != linv.order() || a.cols() != linv.order())
    throw ArgumentError("reduce_to_standard: dimensions do not match");
  Matrix<Scalar> sym = a;
  mirror_lower(sym);
  const Matrix<Scalar> x = triangular_multiply_left(linv.l, sym, false);
  Matrix<Scalar> y = triangular_multiply_left<Scalar>(linv.l, x.transpose(), false);
  const Index n = y.rows();
  for (Index j = 0; j < n; ++j)
    for (Index i = j + 1; i < n; ++i) y(i, j) = y(j, i) = (y(i, j) + y(j, i)) / 2;
  return y;
}

/// V = L^{-T} V~.
template <typename Scalar>
Matrix<Scalar> back_transform_generalized(const Matrix<Scalar>& vt,
                                          const CholeskyFactor<Scalar>& linv) {
  if (!linv.inverted) throw ArgumentError("back_transform_generalized: factor must hold L^{-1}");
  if (vt.cols() > 0 && vt.rows() != linv.order())
    throw ArgumentError("back_transform_generalized: dimensions do not match");
  if (vt.cols() == 0) return Matrix<Scalar>(linv.order(), 0);
  return triangular_multiply_left(linv.l, vt, true);
}

}  // namespace evp
