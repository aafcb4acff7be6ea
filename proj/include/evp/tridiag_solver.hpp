#pragma once

#include <numeric>
#include <vector>

#include "evp/tridiagonal_form.hpp"

namespace evp {

/// All eigenvalues (ascending) and the eigenvectors of the lowest k of them.
template <typename Scalar>
struct EigenPairs {
  Vector<Scalar> values;
  Matrix<Scalar> vectors;  // n x k, column j pairs with values[j]

  Index count() const noexcept { return vectors.cols(); }
};

namespace detail {

struct Rotation {
  Index i;
  double c;
  double s;
};

// Applies the rotations of one QL sweep to the columns of z. Rows are
// independent, so row blocks can run on different workers without changing
// any result bit.
template <typename Scalar>
void rotate_columns(Matrix<Scalar>& z, const std::vector<Rotation>& rotations) {
  const Index n = z.rows();
  constexpr Index kRowBlock = 256;
  const Index blocks = (n + kRowBlock - 1) / kRowBlock;
#pragma omp parallel for schedule(static) if (n * static_cast<Index>(rotations.size()) > 100000)
  for (Index b = 0; b < blocks; ++b) {
    const Index r0 = b * kRowBlock, r1 = std::min(n, r0 + kRowBlock);
    for (const auto& rot : rotations) {
      const Scalar c = static_cast<Scalar>(rot.c), s = static_cast<Scalar>(rot.s);
      Scalar* zi = z.col(rot.i).data();
      Scalar* zi1 = z.col(rot.i + 1).data();
      for (Index k = r0; k < r1; ++k) {
        const Scalar f = zi1[k];
        zi1[k] = s * zi[k] + c * f;
        zi[k] = c * zi[k] - s * f;
      }
    }
  }
  flops::add(6 * static_cast<std::uint64_t>(n) * rotations.size());
}

}  // namespace detail

/// Implicit QL with Wilkinson shift on a symmetric tridiagonal matrix.
///
/// Every rotation is accumulated into an identity-initialized n x n block
/// (when k > 0), the pairs are sorted ascending and only the first k vector
/// columns are returned. Each vector's largest-magnitude entry is positive.
/// An off-diagonal entry with |e_i| <= eps (|d_i| + |d_{i+1}|) is set to zero,
/// splitting the problem.
template <typename Scalar>
EigenPairs<Scalar> solve_tridiagonal(const TridiagonalForm<Scalar>& t, Index k) {
  const Index n = t.d.size();
  if (n < 1) throw ArgumentError("solve_tridiagonal: empty matrix");
  if (t.e.size() != n - 1) throw ArgumentError("solve_tridiagonal: subdiagonal must have n-1 entries");
  if (k < 0 || k > n) throw ArgumentError("solve_tridiagonal: requested vector count exceeds order");
  for (Index i = 0; i < n; ++i)
    if (!std::isfinite(t.d[i]) || (i + 1 < n && !std::isfinite(t.e[i])))
      throw ArgumentError("solve_tridiagonal: non-finite entry");

  const bool want_vectors = k > 0;
  const Scalar eps = unit_roundoff<Scalar>();
  Vector<Scalar> d = t.d;
  Vector<Scalar> e = Vector<Scalar>::Zero(n);
  e.head(n - 1) = t.e;
  Matrix<Scalar> z;
  if (want_vectors) z = Matrix<Scalar>::Identity(n, n);

  std::vector<detail::Rotation> rotations;
  rotations.reserve(static_cast<std::size_t>(n));
  const Index max_iter = 30 * n;

  for (Index l = 0; l < n; ++l) {
    Index iter = 0;
    for (;;) {
      Index m = l;
      for (; m < n - 1; ++m) {
        const Scalar dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= eps * dd) {
          e[m] = 0;
          break;
        }
      }
      if (m == l) break;
      if (iter++ == max_iter) throw ConvergenceError(l);

      // Wilkinson shift from the leading 2x2 block
      Scalar g = (d[l + 1] - d[l]) / (2 * e[l]);
      Scalar r = std::hypot(g, Scalar(1));
      g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
      Scalar s = 1, c = 1, p = 0;
      bool underflow = false;
      rotations.clear();
      for (Index i = m - 1; i >= l; --i) {
        const Scalar f = s * e[i];
        const Scalar b = c * e[i];
        r = std::hypot(f, g);
        e[i + 1] = r;
        if (r == 0) {
          d[i + 1] -= p;
          e[m] = 0;
          underflow = true;
          break;
        }
        s = f / r;
        c = g / r;
        g = d[i + 1] - p;
        r = (d[i] - g) * s + 2 * c * b;
        p = s * r;
        d[i + 1] = g + p;
        g = c * r - b;
        rotations.push_back({i, static_cast<double>(c), static_cast<double>(s)});
      }
      if (want_vectors && !rotations.empty()) detail::rotate_columns(z, rotations);
      if (underflow) continue;
      d[l] -= p;
      e[l] = g;
      e[m] = 0;
    }
  }

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return d[a] < d[b]; });

  EigenPairs<Scalar> out;
  out.values.resize(n);
  for (Index j = 0; j < n; ++j) out.values[j] = d[order[static_cast<std::size_t>(j)]];
  out.vectors.resize(n, k);
  for (Index j = 0; j < k; ++j) {
    const Index src = order[static_cast<std::size_t>(j)];
    Index arg = 0;
    for (Index i = 1; i < n; ++i)
      if (std::abs(z(i, src)) > std::abs(z(arg, src))) arg = i;
    const Scalar sign = z(arg, src) < 0 ? Scalar(-1) : Scalar(1);
    for (Index i = 0; i < n; ++i) out.vectors(i, j) = sign * z(i, src);
  }
  return out;
}

}  // namespace evp
