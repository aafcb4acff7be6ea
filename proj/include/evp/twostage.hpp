#pragma once

#include <utility>
#include <vector>

#include "evp/onestage.hpp"

namespace evp {

/// Symmetric band matrix with semi-bandwidth b, lower band storage:
/// bands(k, j) = A(j + k, j) for k = 0..b.
template <typename Scalar>
struct BandForm {
  Index n = 0;
  Index b = 0;
  Matrix<Scalar> bands;

  Scalar at(Index i, Index j) const noexcept {
    if (i < j) std::swap(i, j);
    return (i - j <= b) ? bands(i - j, j) : Scalar(0);
  }

  Matrix<Scalar> to_dense() const {
    Matrix<Scalar> a = Matrix<Scalar>::Zero(n, n);
    for (Index j = 0; j < n; ++j)
      for (Index k = 0; k <= b && j + k < n; ++k) a(j + k, j) = a(j, j + k) = bands(k, j);
    return a;
  }
};

template <typename Scalar>
struct BandReduction {
  BandForm<Scalar> band;
  HouseholderSet<Scalar> reflectors;
};

template <typename Scalar>
struct BulgeChase {
  TridiagonalForm<Scalar> form;
  HouseholderSet<Scalar> reflectors;
};

namespace detail {

// x <- (I - tau v v^T) x on rows [head, head + len] of one column, v_0 = 1.
template <typename Scalar>
void reflect_column(Scalar* x, Index head, const Scalar* tail, Index len, Scalar tau) noexcept {
  Scalar s = x[head];
  for (Index i = 0; i < len; ++i) s += tail[i] * x[head + 1 + i];
  s *= tau;
  x[head] -= s;
  for (Index i = 0; i < len; ++i) x[head + 1 + i] -= s * tail[i];
}

// Two-sided reflection of the diagonal block A[s, s+m) x [s, s+m) of a fully
// stored symmetric matrix.
template <typename Scalar>
void reflect_diagonal_block(Matrix<Scalar>& a, Index s, Index m, const Scalar* v, Scalar tau,
                            std::vector<Scalar>& w) {
  w.assign(static_cast<std::size_t>(m), Scalar(0));
  for (Index j = 0; j < m; ++j) {
    const Scalar* aj = a.col(s + j).data() + s;
    for (Index i = 0; i < m; ++i) w[static_cast<std::size_t>(i)] += aj[i] * v[j];
  }
  Scalar pv = 0;
  for (Index i = 0; i < m; ++i) {
    w[static_cast<std::size_t>(i)] *= tau;
    pv += w[static_cast<std::size_t>(i)] * v[i];
  }
  const Scalar half = Scalar(-0.5) * tau * pv;
  for (Index i = 0; i < m; ++i) w[static_cast<std::size_t>(i)] += half * v[i];
  for (Index j = 0; j < m; ++j) {
    Scalar* aj = a.col(s + j).data() + s;
    for (Index i = 0; i < m; ++i)
      aj[i] -= v[i] * w[static_cast<std::size_t>(j)] + w[static_cast<std::size_t>(i)] * v[j];
  }
}

template <typename Scalar>
BandForm<Scalar> extract_band(const Matrix<Scalar>& a, Index b) {
  BandForm<Scalar> band;
  band.n = a.rows();
  band.b = b;
  band.bands = Matrix<Scalar>::Zero(b + 1, band.n);
  for (Index j = 0; j < band.n; ++j)
    for (Index k = 0; k <= b && j + k < band.n; ++k) band.bands(k, j) = a(j + k, j);
  return band;
}

/// Runs the bulge chase on a fully stored dense copy of the band and returns
/// the reduced dense matrix alongside the reflectors (exposed for testing).
template <typename Scalar>
std::pair<Matrix<Scalar>, HouseholderSet<Scalar>> chase_dense(const BandForm<Scalar>& band) {
  const Index n = band.n, b = band.b;
  Matrix<Scalar> a = band.to_dense();
  HouseholderSet<Scalar> hh;
  hh.stage = StageTag::bulge_chase;
  hh.order = n;
  std::vector<Scalar> tails, v, w;
  if (b <= 1) {
    hh.storage.resize(0, 1);
    return {std::move(a), std::move(hh)};
  }

  std::uint64_t ops = 0;
  for (Index sweep = 0; sweep + 2 < n; ++sweep) {
    Index col = sweep;
    Index s1 = sweep + 1;
    Index s2 = std::min(sweep + b, n - 1);
    while (s2 > s1) {
      const Index len = s2 - s1;
      Scalar* ac = a.col(col).data();
      const Scalar tau = make_reflector(ac[s1], ac + s1 + 1, len);

      ReflectorSpan sp;
      sp.head = s1;
      sp.tail_length = len;
      sp.offset = static_cast<Index>(tails.size());
      sp.column = col;
      sp.sweep = sweep;
      hh.spans.push_back(sp);
      hh.betas.push_back(tau);
      tails.insert(tails.end(), ac + s1 + 1, ac + s1 + 1 + len);
      v.assign(static_cast<std::size_t>(len + 1), Scalar(1));
      std::copy(ac + s1 + 1, ac + s1 + 1 + len, v.begin() + 1);
      for (Index i = s1 + 1; i <= s2; ++i) ac[i] = 0;
      for (Index i = s1; i <= s2; ++i) a(col, i) = ac[i];

      if (tau != Scalar(0)) {
        // Columns with entries in rows [s1, s2]: the previous support (the
        // bulge) to the left and the band plus fill below.
        const Index hi = std::min(n - 1, s2 + b);
        for (Index c = col + 1; c <= hi; ++c) {
          if (c == s1) {
            c = s2;
            continue;
          }
          Scalar* x = a.col(c).data();
          reflect_column(x, s1, v.data() + 1, len, tau);
          for (Index i = s1; i <= s2; ++i) a(c, i) = x[i];
        }
        reflect_diagonal_block(a, s1, len + 1, v.data(), tau, w);
        ops += static_cast<std::uint64_t>(4 * (len + 1) * (hi - col) + 6 * (len + 1) * (len + 1));
      }
      col = s1;
      s1 = s2 + 1;
      s2 = std::min(s1 + b - 1, n - 1);
    }
  }
  flops::add(ops);
  hh.storage = Eigen::Map<const Matrix<Scalar>>(tails.data(), static_cast<Index>(tails.size()), 1);
  return {std::move(a), std::move(hh)};
}

}  // namespace detail

/// Stage 1: orthogonal reduction of a symmetric matrix to semi-bandwidth b
/// by QR-style panels of b columns. `a` is consumed; the reflector tails are
/// kept in the eliminated region below the band.
template <typename Scalar>
BandReduction<Scalar> reduce_to_band(Matrix<Scalar> a, Index b) {
  detail::require_square(a, "reduce_to_band: A");
  const Index n = a.rows();
  if (b < 1 || b >= n)
    throw ArgumentError("reduce_to_band: semi-bandwidth " + std::to_string(b) +
                        " outside [1, " + std::to_string(n - 1) + "]");
  if (!all_finite(a)) throw ArgumentError("reduce_to_band: non-finite input");
  mirror_lower(a);

  HouseholderSet<Scalar> hh;
  hh.stage = StageTag::band_reduction;
  hh.order = n;
  std::vector<Scalar> v, work;

  for (Index p = 0; p + b < n - 1; p += b) {
    const Index width = std::min(b, n - p);
    for (Index i = 0; i < width; ++i) {
      const Index c = p + i;
      const Index r = c + b;
      if (r >= n - 1) break;
      Scalar* ac = a.col(c).data();
      const Index len = n - r - 1;
      const Scalar tau = make_reflector(ac[r], ac + r + 1, len);
      ReflectorSpan sp;
      sp.head = r;
      sp.tail_length = len;
      sp.offset = c * n + r + 1;
      sp.column = c;
      hh.spans.push_back(sp);
      hh.betas.push_back(tau);
      if (tau == Scalar(0)) continue;

      v.assign(static_cast<std::size_t>(len + 1), Scalar(1));
      std::copy(ac + r + 1, ac + n, v.begin() + 1);
      for (Index cc = c + 1; cc < r; ++cc) {
        Scalar* x = a.col(cc).data();
        detail::reflect_column(x, r, v.data() + 1, len, tau);
        for (Index k = r; k < n; ++k) a(cc, k) = x[k];
      }
      detail::symmetric_reflect(a, r, v.data(), tau, work);
      flops::add(static_cast<std::uint64_t>(4 * (len + 1) * (r - c)));
    }
  }

  BandReduction<Scalar> out;
  out.band = detail::extract_band(a, b);
  hh.storage = std::move(a);
  out.reflectors = std::move(hh);
  return out;
}

/// Stage 2: bulge chasing. Sweep j annihilates column j below the
/// subdiagonal with a reflector of length <= b and then chases the created
/// bulge down the band, one length-b reflector per block. Every reflector
/// is recorded with its column and sweep.
template <typename Scalar>
BulgeChase<Scalar> band_to_tridiagonal(const BandForm<Scalar>& band) {
  const Index n = band.n;
  if (band.b < 1 || (n > 1 && band.b >= n) || band.bands.rows() != band.b + 1 ||
      band.bands.cols() != n)
    throw ArgumentError("band_to_tridiagonal: malformed band");
  auto [a, hh] = detail::chase_dense(band);
  BulgeChase<Scalar> out;
  out.form.d.resize(n);
  out.form.e.resize(std::max<Index>(n - 1, 0));
  for (Index i = 0; i < n; ++i) out.form.d[i] = a(i, i);
  for (Index i = 0; i + 1 < n; ++i) out.form.e[i] = a(i + 1, i);
  out.reflectors = std::move(hh);
  return out;
}

/// V = Q1 Q2 V^: stage-2 reflectors first, then stage-1, both in reverse
/// order, through the selected kernel.
template <typename Scalar>
Matrix<Scalar> back_transform_2stage(const HouseholderSet<Scalar>& stage1,
                                     const HouseholderSet<Scalar>& stage2, Matrix<Scalar> vhat,
                                     const KernelVariant& kernel, Index backtransform_block) {
  if (stage1.stage != StageTag::band_reduction || stage2.stage != StageTag::bulge_chase)
    throw ArgumentError("back_transform_2stage: reflector stages do not match");
  apply_reflectors_reverse(stage2, vhat, kernel, backtransform_block);
  apply_reflectors_reverse(stage1, vhat, kernel, backtransform_block);
  return vhat;
}

}  // namespace evp
