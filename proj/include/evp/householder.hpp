#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "evp/matrix.hpp"

namespace evp {

/// Which reduction produced a reflector set.
enum class StageTag { onestage, band_reduction, bulge_chase };

/// Location of one reflector H = I - beta*v*v^T inside a HouseholderSet.
/// v has an implicit 1 at row `head`; the following `tail_length` entries
/// are stored contiguously at `offset` in the set's storage.
struct ReflectorSpan {
  Index head = 0;
  Index tail_length = 0;
  Index offset = 0;
  Index column = -1;  // column annihilated by this reflector
  Index sweep = -1;   // bulge-chase sweep (stage 2 only)
};

/// An ordered sequence of Householder reflectors, never formed explicitly.
/// Reflector i was applied as A <- H_i A H_i in index order, so the
/// back-transformation applies them in reverse.
template <typename Scalar>
struct HouseholderSet {
  StageTag stage = StageTag::onestage;
  Index order = 0;
  Matrix<Scalar> storage;
  std::vector<ReflectorSpan> spans;
  std::vector<Scalar> betas;

  Index count() const noexcept { return static_cast<Index>(spans.size()); }
  const Scalar* tail(Index r) const noexcept { return storage.data() + spans[r].offset; }
};

/// Generates a reflector mapping (alpha, x) to (beta, 0) with
/// beta = -sign(alpha) * ||(alpha, x)||. On return `alpha` holds beta and
/// `x` holds the tail of v (v_0 = 1 implicit). Returns the scalar beta
/// factor of H (zero, with x untouched, when x is already zero).
template <typename Scalar>
Scalar make_reflector(Scalar& alpha, Scalar* x, Index n) noexcept {
  Scalar scale = 0, ssq = 1;
  for (Index i = 0; i < n; ++i) {
    const Scalar a = std::abs(x[i]);
    if (a == 0) continue;
    if (scale < a) {
      ssq = 1 + ssq * (scale / a) * (scale / a);
      scale = a;
    } else {
      ssq += (a / scale) * (a / scale);
    }
  }
  const Scalar xnorm = scale * std::sqrt(ssq);
  if (xnorm == 0) return Scalar(0);
  const Scalar beta = -std::copysign(std::hypot(alpha, xnorm), alpha);
  const Scalar tau = (beta - alpha) / beta;
  const Scalar inv = Scalar(1) / (alpha - beta);
  for (Index i = 0; i < n; ++i) x[i] *= inv;
  alpha = beta;
  return tau;
}

/// Portable reflector-application kernels. They differ only in how many
/// eigenvector columns share one pass over a reflector; the arithmetic on
/// any single column is identical, so all variants agree bitwise.
struct KernelVariant {
  std::string_view name;
  Index block_columns;
};

inline constexpr std::array<KernelVariant, 3> kKernelRegistry{{
    {"generic", 1},
    {"blocked", 4},
    {"wide", 8},
}};

inline const KernelVariant& find_kernel(std::string_view name) {
  for (const auto& k : kKernelRegistry)
    if (k.name == name) return k;
  throw ArgumentError("unknown kernel '" + std::string(name) + "'");
}

namespace detail {

template <typename Scalar, int Width>
void apply_span_group(const Scalar* tail, Index head, Index len, Scalar beta,
                      std::array<Scalar*, Width> cols) noexcept {
  Scalar s[Width];
  for (int c = 0; c < Width; ++c) s[c] = cols[c][head];
  for (Index i = 0; i < len; ++i) {
    const Scalar t = tail[i];
    for (int c = 0; c < Width; ++c) s[c] += t * cols[c][head + 1 + i];
  }
  for (int c = 0; c < Width; ++c) {
    s[c] *= beta;
    cols[c][head] -= s[c];
  }
  for (Index i = 0; i < len; ++i) {
    const Scalar t = tail[i];
    for (int c = 0; c < Width; ++c) cols[c][head + 1 + i] -= s[c] * t;
  }
}

template <typename Scalar, int Width>
void apply_chunk(const HouseholderSet<Scalar>& set, Index first, Index last, Scalar* const* cols) {
  std::array<Scalar*, Width> group;
  for (int c = 0; c < Width; ++c) group[c] = cols[c];
  for (Index r = first; r >= last; --r) {
    const Scalar beta = set.betas[static_cast<std::size_t>(r)];
    if (beta == Scalar(0)) continue;
    const auto& sp = set.spans[static_cast<std::size_t>(r)];
    apply_span_group<Scalar, Width>(set.tail(r), sp.head, sp.tail_length, beta, group);
  }
}

}  // namespace detail

/// X <- H_0 H_1 ... H_{m-1} X, i.e. reflectors applied in reverse order.
/// `fuse_block` reflectors are applied to one column group before moving on.
template <typename Scalar>
void apply_reflectors_reverse(const HouseholderSet<Scalar>& set, Matrix<Scalar>& x,
                              const KernelVariant& kernel, Index fuse_block) {
  if (x.cols() == 0 || set.count() == 0) return;
  if (x.rows() != set.order)
    throw ArgumentError("reflector set of order " + std::to_string(set.order) +
                        " applied to block with " + std::to_string(x.rows()) + " rows");
  if (fuse_block < 1) throw ArgumentError("backtransform block must be >= 1");
  const Index width = kernel.block_columns;
  const Index k = x.cols();
  const Index groups = (k + width - 1) / width;

  for (Index first = set.count() - 1; first >= 0; first -= fuse_block) {
    const Index last = std::max<Index>(0, first - fuse_block + 1);
#pragma omp parallel for schedule(static) if (k * set.order > 200000)
    for (Index g = 0; g < groups; ++g) {
      const Index c0 = g * width;
      const Index c1 = std::min(k, c0 + width);
      std::array<Scalar*, 8> cols{};
      for (Index c = c0; c < c1; ++c) cols[static_cast<std::size_t>(c - c0)] = x.col(c).data();
      if (c1 - c0 == width && width == 8) {
        detail::apply_chunk<Scalar, 8>(set, first, last, cols.data());
      } else if (c1 - c0 == width && width == 4) {
        detail::apply_chunk<Scalar, 4>(set, first, last, cols.data());
      } else {
        for (Index c = c0; c < c1; ++c)
          detail::apply_chunk<Scalar, 1>(set, first, last, &cols[static_cast<std::size_t>(c - c0)]);
      }
    }
  }

  std::uint64_t per_column = 0;
  for (Index r = 0; r < set.count(); ++r)
    if (set.betas[static_cast<std::size_t>(r)] != Scalar(0))
      per_column += 4 * static_cast<std::uint64_t>(set.spans[static_cast<std::size_t>(r)].tail_length + 1);
  flops::add(per_column * static_cast<std::uint64_t>(k));
}

}  // namespace evp
