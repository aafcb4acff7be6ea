#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <type_traits>
#include <vector>

#include "evp/errors.hpp"
#include "evp/instrument.hpp"

namespace evp {

using Index = Eigen::Index;

/// Dense column-major storage used for every operand of the solver.
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Eigenvalues, ascending.
using Spectrum = Vector<double>;

/// Precision tag; the enumerator value is the element width in bytes.
enum class Precision : std::uint8_t { sp = 4, dp = 8 };

template <typename Scalar>
constexpr Precision precision_of() {
  static_assert(std::is_same_v<Scalar, float> || std::is_same_v<Scalar, double>);
  return std::is_same_v<Scalar, float> ? Precision::sp : Precision::dp;
}

template <typename Scalar>
constexpr Scalar unit_roundoff() {
  return std::numeric_limits<Scalar>::epsilon();
}

/// How a precision conversion walks the source: one element at a time, or
/// as a single contiguous block.
enum class ConvertMethod { elementwise, block };

/// SplitMix64 (Steele, Lea, Flood 2014). All seeded test matrices draw from
/// this generator so they are reproducible independently of the C++ library.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  std::uint64_t next() noexcept {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1) from the top 53 bits.
  double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform double in [-1, 1).
  double symmetric_uniform() noexcept { return 2.0 * uniform() - 1.0; }

 private:
  std::uint64_t state_;
};

namespace detail {

// Dot product with four interleaved partial sums combined in a fixed order.
// Used only where bit-compatibility with the one-accumulator kernels is not
// required.
template <typename Scalar>
Scalar dot4(const Scalar* x, const Scalar* y, Index n) noexcept {
  Scalar s0 = 0, s1 = 0, s2 = 0, s3 = 0;
  Index i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += x[i] * y[i];
    s1 += x[i + 1] * y[i + 1];
    s2 += x[i + 2] * y[i + 2];
    s3 += x[i + 3] * y[i + 3];
  }
  for (; i < n; ++i) s0 += x[i] * y[i];
  return (s0 + s1) + (s2 + s3);
}

template <typename Scalar>
void require_square(const Matrix<Scalar>& m, const char* what) {
  if (m.rows() != m.cols()) throw ArgumentError(std::string(what) + " must be square");
}

}  // namespace detail

template <typename Scalar>
bool all_finite(const Matrix<Scalar>& m) noexcept {
  const Scalar* p = m.data();
  for (Index i = 0; i < m.size(); ++i)
    if (!std::isfinite(p[i])) return false;
  return true;
}

/// Exact symmetry test (no tolerance).
template <typename Scalar>
bool is_symmetric(const Matrix<Scalar>& m) noexcept {
  if (m.rows() != m.cols()) return false;
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = j + 1; i < m.rows(); ++i)
      if (m(i, j) != m(j, i)) return false;
  return true;
}

/// Copies the lower triangle onto the upper one; the lower triangle is the
/// source of truth for every symmetric routine.
template <typename Scalar>
void mirror_lower(Matrix<Scalar>& m) noexcept {
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = j + 1; i < m.rows(); ++i) m(j, i) = m(i, j);
}

template <typename Scalar>
Scalar frobenius_norm(const Matrix<Scalar>& m) noexcept {
  // scaled sum of squares avoids overflow for large entries
  Scalar scale = 0, ssq = 1;
  const Scalar* p = m.data();
  for (Index i = 0; i < m.size(); ++i) {
    const Scalar a = std::abs(p[i]);
    if (a == 0) continue;
    if (scale < a) {
      ssq = 1 + ssq * (scale / a) * (scale / a);
      scale = a;
    } else {
      ssq += (a / scale) * (a / scale);
    }
  }
  return scale * std::sqrt(ssq);
}

template <typename Scalar>
Scalar max_abs(const Matrix<Scalar>& m) noexcept {
  Scalar r = 0;
  const Scalar* p = m.data();
  for (Index i = 0; i < m.size(); ++i) r = std::max(r, std::abs(p[i]));
  return r;
}

/// C = A*B. Column blocks of C are independent; within an element the
/// products are always accumulated in ascending k, so the result is
/// bitwise reproducible for any worker count.
template <typename Scalar>
Matrix<Scalar> blocked_multiply(const Matrix<Scalar>& a, const Matrix<Scalar>& b, Index block) {
  if (block < 1) throw ArgumentError("blocked_multiply: block must be >= 1");
  if (a.cols() != b.rows())
    throw ArgumentError("blocked_multiply: inner dimensions do not match");
  const Index m = a.rows(), n = b.cols(), kk = a.cols();
  Matrix<Scalar> c = Matrix<Scalar>::Zero(m, n);
  const Index col_blocks = (n + block - 1) / block;
#pragma omp parallel for schedule(static) if (m * n * kk > 1000000)
  for (Index jb = 0; jb < col_blocks; ++jb) {
    const Index j0 = jb * block, j1 = std::min(n, j0 + block);
    for (Index k0 = 0; k0 < kk; k0 += block) {
      const Index k1 = std::min(kk, k0 + block);
      for (Index i0 = 0; i0 < m; i0 += block) {
        const Index i1 = std::min(m, i0 + block);
        for (Index j = j0; j < j1; ++j) {
          Scalar* cj = c.col(j).data();
          for (Index k = k0; k < k1; ++k) {
            const Scalar bkj = b(k, j);
            const Scalar* ak = a.col(k).data();
            for (Index i = i0; i < i1; ++i) cj[i] += ak[i] * bkj;
          }
        }
      }
    }
  }
  flops::add(static_cast<std::uint64_t>(2 * m * n * kk));
  return c;
}

/// C = L*A (or L^T*A when `transpose_l`), touching only the lower triangle of L.
template <typename Scalar>
Matrix<Scalar> triangular_multiply_left(const Matrix<Scalar>& l, const Matrix<Scalar>& a,
                                        bool transpose_l) {
  detail::require_square(l, "triangular_multiply_left: L");
  if (l.cols() != a.rows())
    throw ArgumentError("triangular_multiply_left: dimensions do not match");
  const Index n = l.rows(), cols = a.cols();
  Matrix<Scalar> c(n, cols);
  if (!transpose_l) {
#pragma omp parallel for schedule(static) if (n * n * cols > 1000000)
    for (Index j = 0; j < cols; ++j) {
      Scalar* cj = c.col(j).data();
      std::fill(cj, cj + n, Scalar(0));
      const Scalar* aj = a.col(j).data();
      for (Index k = 0; k < n; ++k) {
        const Scalar akj = aj[k];
        const Scalar* lk = l.col(k).data();
        for (Index i = k; i < n; ++i) cj[i] += lk[i] * akj;
      }
    }
  } else {
    // (L^T A)(i,j) = sum_{k>=i} L(k,i) A(k,j): a dot of column i of L with column j of A.
#pragma omp parallel for schedule(static) if (n * n * cols > 1000000)
    for (Index j = 0; j < cols; ++j) {
      const Scalar* aj = a.col(j).data();
      for (Index i = 0; i < n; ++i) {
        const Scalar* li = l.col(i).data();
        Scalar s = li[i] * aj[i];
        for (Index k = i + 1; k < n; ++k) s += li[k] * aj[k];
        c(i, j) = s;
      }
    }
  }
  flops::add(static_cast<std::uint64_t>(n * (n + 1) * cols));
  return c;
}

/// Rounds every entry to `To` with IEEE round-to-nearest-even.
/// Both methods use the same rounding and give bitwise-identical results;
/// a finite value that overflows the target raises PrecisionOverflow.
template <typename To, typename From>
Matrix<To> convert_precision(const Matrix<From>& m, ConvertMethod method) {
  Matrix<To> out(m.rows(), m.cols());
  auto overflow_at = [&](Index linear) {
    throw PrecisionOverflow(linear % std::max<Index>(m.rows(), 1),
                            linear / std::max<Index>(m.rows(), 1));
  };
  if (method == ConvertMethod::elementwise) {
    for (Index j = 0; j < m.cols(); ++j)
      for (Index i = 0; i < m.rows(); ++i) {
        const To v = static_cast<To>(m(i, j));
        if (std::isinf(v) && !std::isinf(m(i, j))) overflow_at(j * m.rows() + i);
        out(i, j) = v;
      }
  } else {
    const std::span<const From> src(m.data(), static_cast<std::size_t>(m.size()));
    std::transform(src.begin(), src.end(), out.data(), [](From x) { return static_cast<To>(x); });
    if constexpr (sizeof(To) < sizeof(From)) {
      const To* dst = out.data();
      for (Index i = 0; i < out.size(); ++i)
        if (std::isinf(dst[i]) && !std::isinf(src[static_cast<std::size_t>(i)])) overflow_at(i);
    }
  }
  return out;
}

/// Symmetric matrix with entries uniform in [-1, 1), drawn column by column
/// over the lower triangle.
template <typename Scalar = double>
Matrix<Scalar> random_symmetric(Index n, std::uint64_t seed) {
  if (n < 1) throw ArgumentError("random_symmetric: n must be >= 1");
  SplitMix64 rng(seed);
  Matrix<Scalar> a(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = j; i < n; ++i) a(i, j) = a(j, i) = static_cast<Scalar>(rng.symmetric_uniform());
  return a;
}

/// Symmetric matrix with prescribed eigenvalues: A = Q diag(spectrum) Q^T,
/// where Q orthonormalizes (classical Gram-Schmidt, applied twice) an n x n
/// matrix of SplitMix64 draws in [-1, 1) filled column by column.
/// The result is exactly symmetric (lower triangle mirrored).
template <typename Scalar = double>
Matrix<Scalar> make_symmetric_with_spectrum(Index n, const Spectrum& spectrum, std::uint64_t seed) {
  if (n < 1) throw ArgumentError("make_symmetric_with_spectrum: n must be >= 1");
  if (spectrum.size() != n)
    throw ArgumentError("make_symmetric_with_spectrum: spectrum has " +
                        std::to_string(spectrum.size()) + " entries, expected " +
                        std::to_string(n));
  SplitMix64 rng(seed);
  Matrix<double> q(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) q(i, j) = rng.symmetric_uniform();

  std::vector<double> r(static_cast<std::size_t>(n));
  for (Index j = 0; j < n; ++j) {
    double* qj = q.col(j).data();
    for (int pass = 0; pass < 2; ++pass) {
      for (Index k = 0; k < j; ++k) r[k] = detail::dot4(q.col(k).data(), qj, n);
      for (Index k = 0; k < j; ++k) {
        const double* qk = q.col(k).data();
        for (Index i = 0; i < n; ++i) qj[i] -= r[k] * qk[i];
      }
    }
    const double norm = std::sqrt(detail::dot4(qj, qj, n));
    for (Index i = 0; i < n; ++i) qj[i] /= norm;
  }

  Matrix<double> scaled = q;
  for (Index k = 0; k < n; ++k) scaled.col(k) *= spectrum[k];
  Matrix<double> a = blocked_multiply<double>(scaled, q.transpose(), 64);
  mirror_lower(a);
  if constexpr (std::is_same_v<Scalar, double>) {
    return a;
  } else {
    return convert_precision<Scalar>(a, ConvertMethod::block);
  }
}

}  // namespace evp
