#pragma once

#include <utility>

#include "evp/householder.hpp"
#include "evp/tridiagonal_form.hpp"

namespace evp {

template <typename Scalar>
struct Tridiagonalization {
  TridiagonalForm<Scalar> form;
  HouseholderSet<Scalar> reflectors;
};

namespace detail {

// y[0:n-r0) += A[r0:n, r0:n) * v with v and y indexed from r0. Column-oriented
// so each output entry accumulates in ascending column order.
template <typename Scalar>
void symmetric_matvec(const Matrix<Scalar>& a, Index r0, const Scalar* v, Scalar* y) {
  const Index n = a.rows();
  const Index m = n - r0;
  constexpr Index kRowBlock = 512;
  const Index blocks = (m + kRowBlock - 1) / kRowBlock;
#pragma omp parallel for schedule(static) if (m * m > 250000)
  for (Index b = 0; b < blocks; ++b) {
    const Index i0 = r0 + b * kRowBlock, i1 = std::min(n, i0 + kRowBlock);
    for (Index j = r0; j < n; ++j) {
      const Scalar vj = v[j - r0];
      const Scalar* aj = a.col(j).data();
      for (Index i = i0; i < i1; ++i) y[i - r0] += aj[i] * vj;
    }
  }
}

// A[r0:n, r0:n) -= V W^T + W V^T for `count` column pairs (full storage).
template <typename Scalar>
void symmetric_rank2k_update(Matrix<Scalar>& a, Index r0, const Matrix<Scalar>& v,
                             const Matrix<Scalar>& w, Index count) {
  const Index n = a.rows();
#pragma omp parallel for schedule(static) if ((n - r0) * (n - r0) * count > 500000)
  for (Index j = r0; j < n; ++j) {
    Scalar* aj = a.col(j).data();
    for (Index c = 0; c < count; ++c) {
      const Scalar wj = w(j - r0, c), vj = v(j - r0, c);
      const Scalar* vc = v.col(c).data() - r0;
      const Scalar* wc = w.col(c).data() - r0;
      for (Index i = r0; i < n; ++i) aj[i] -= vc[i] * wj + wc[i] * vj;
    }
  }
}

// Two-sided application of one reflector to the trailing block A[r0:n, r0:n)
// of a fully stored symmetric matrix: A <- H A H with H = I - tau v v^T.
template <typename Scalar>
void symmetric_reflect(Matrix<Scalar>& a, Index r0, const Scalar* v, Scalar tau,
                       std::vector<Scalar>& work) {
  const Index n = a.rows(), m = n - r0;
  work.assign(static_cast<std::size_t>(m), Scalar(0));
  symmetric_matvec(a, r0, v, work.data());
  Scalar pv = 0;
  for (Index i = 0; i < m; ++i) {
    work[static_cast<std::size_t>(i)] *= tau;
    pv += work[static_cast<std::size_t>(i)] * v[i];
  }
  const Scalar half = Scalar(-0.5) * tau * pv;
  for (Index i = 0; i < m; ++i) work[static_cast<std::size_t>(i)] += half * v[i];
#pragma omp parallel for schedule(static) if (m * m > 250000)
  for (Index j = 0; j < m; ++j) {
    Scalar* aj = a.col(r0 + j).data() + r0;
    const Scalar wj = work[static_cast<std::size_t>(j)], vj = v[j];
    for (Index i = 0; i < m; ++i) aj[i] -= v[i] * wj + work[static_cast<std::size_t>(i)] * vj;
  }
  flops::add(static_cast<std::uint64_t>(6 * m * m + 6 * m));
}

}  // namespace detail

/// Householder reduction T = Q A Q^T of a symmetric matrix, one column at a
/// time. `a` is consumed: its lower triangle is the input, and the reflector
/// tails end up stored below the subdiagonal of the eliminated columns.
///
/// Panels of `block` columns are reduced with a deferred rank-2k update of
/// the trailing matrix; orders below 2*block use the unblocked path only.
template <typename Scalar>
Tridiagonalization<Scalar> tridiagonalize(Matrix<Scalar> a, Index block = 64) {
  detail::require_square(a, "tridiagonalize: A");
  if (block < 1) throw ArgumentError("tridiagonalize: block must be >= 1");
  if (!all_finite(a)) throw ArgumentError("tridiagonalize: non-finite input");
  const Index n = a.rows();
  mirror_lower(a);

  Vector<Scalar> d(n), e(std::max<Index>(n - 1, 0));
  std::vector<Scalar> betas(static_cast<std::size_t>(std::max<Index>(n - 2, 0)), Scalar(0));
  std::vector<Scalar> work, vbuf;

  Index p = 0;
  if (n >= 2 * block) {
    Matrix<Scalar> vpan, wpan;
    for (; n - p - 1 >= 2 * block; p += block) {
      const Index m = n - p;
      vpan.setZero(m, block);
      wpan.setZero(m, block);
      for (Index i = 0; i < block; ++i) {
        const Index j = p + i;
        // bring column j up to date with the pending panel updates
        Scalar* aj = a.col(j).data();
        for (Index c = 0; c < i; ++c) {
          const Scalar wjc = wpan(j - p, c), vjc = vpan(j - p, c);
          for (Index r = j; r < n; ++r) aj[r] -= vpan(r - p, c) * wjc + wpan(r - p, c) * vjc;
        }
        d[j] = aj[j];
        const Scalar tau = make_reflector(aj[j + 1], aj + j + 2, n - j - 2);
        e[j] = aj[j + 1];
        betas[static_cast<std::size_t>(j)] = tau;

        Scalar* vcol = vpan.col(i).data();
        vcol[j + 1 - p] = 1;
        for (Index r = j + 2; r < n; ++r) vcol[r - p] = aj[r];
        if (tau == Scalar(0)) continue;

        // w = tau (A v - V W^T v - W V^T v), A being the not yet updated trailing block
        Scalar* wcol = wpan.col(i).data();
        const Scalar* v = vcol + (j + 1 - p);
        Scalar* w = wcol + (j + 1 - p);
        detail::symmetric_matvec(a, j + 1, v, w);
        const Index len = n - j - 1;
        for (Index c = 0; c < i; ++c) {
          const Scalar* vc = vpan.col(c).data() + (j + 1 - p);
          const Scalar* wc = wpan.col(c).data() + (j + 1 - p);
          Scalar wv = 0, vv = 0;
          for (Index r = 0; r < len; ++r) {
            wv += wc[r] * v[r];
            vv += vc[r] * v[r];
          }
          for (Index r = 0; r < len; ++r) w[r] -= vc[r] * wv + wc[r] * vv;
        }
        Scalar wtv = 0;
        for (Index r = 0; r < len; ++r) {
          w[r] *= tau;
          wtv += w[r] * v[r];
        }
        const Scalar alpha = Scalar(-0.5) * tau * wtv;
        for (Index r = 0; r < len; ++r) w[r] += alpha * v[r];
        flops::add(static_cast<std::uint64_t>(2 * len * len + 8 * len * i + 6 * len));
      }
      const Index r0 = p + block;
      Matrix<Scalar> vt = vpan.bottomRows(n - r0), wt = wpan.bottomRows(n - r0);
      detail::symmetric_rank2k_update(a, r0, vt, wt, block);
      flops::add(static_cast<std::uint64_t>(4 * (n - r0) * (n - r0) * block));
    }
  }

  for (Index j = p; j < n; ++j) {
    Scalar* aj = a.col(j).data();
    d[j] = aj[j];
    if (j + 1 >= n) break;
    const Scalar tau = make_reflector(aj[j + 1], aj + j + 2, n - j - 2);
    e[j] = aj[j + 1];
    if (j + 2 >= n) continue;
    betas[static_cast<std::size_t>(j)] = tau;
    if (tau == Scalar(0)) continue;
    vbuf.assign(static_cast<std::size_t>(n - j - 1), Scalar(0));
    vbuf[0] = 1;
    for (Index r = j + 2; r < n; ++r) vbuf[static_cast<std::size_t>(r - j - 1)] = aj[r];
    detail::symmetric_reflect(a, j + 1, vbuf.data(), tau, work);
  }

  Tridiagonalization<Scalar> out;
  out.form.d = std::move(d);
  out.form.e = std::move(e);
  auto& hh = out.reflectors;
  hh.stage = StageTag::onestage;
  hh.order = n;
  for (Index j = 0; j + 2 < n; ++j) {
    ReflectorSpan sp;
    sp.head = j + 1;
    sp.tail_length = n - j - 2;
    sp.offset = j * n + j + 2;
    sp.column = j;
    hh.spans.push_back(sp);
  }
  hh.betas = std::move(betas);
  hh.storage = std::move(a);
  return out;
}

/// V~ = Q^T V^: applies the one-stage reflectors (reverse order) to k columns.
template <typename Scalar>
Matrix<Scalar> back_transform_1stage(const HouseholderSet<Scalar>& hh, Matrix<Scalar> vhat,
                                     const KernelVariant& kernel = kKernelRegistry[0],
                                     Index fuse_block = 32) {
  if (hh.stage != StageTag::onestage)
    throw ArgumentError("back_transform_1stage: reflectors are not from the one-stage reduction");
  if (vhat.cols() > 0 && vhat.rows() != hh.order)
    throw ArgumentError("back_transform_1stage: row count does not match reflector order");
  apply_reflectors_reverse(hh, vhat, kernel, fuse_block);
  return vhat;
}

}  // namespace evp
