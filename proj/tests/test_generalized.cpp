#include <doctest.h>

#include "evp/generalized.hpp"
#include "evp/onestage.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace evp;

namespace {

// SPD matrix with eigenvalues log-spaced in [1, cond].
Matrix<double> spd(Index n, double cond, std::uint64_t seed) {
  Spectrum s(n);
  for (Index i = 0; i < n; ++i)
    s[i] = n == 1 ? 1.0 : std::pow(cond, static_cast<double>(i) / static_cast<double>(n - 1));
  return make_symmetric_with_spectrum(n, s, seed);
}

}  // namespace

TEST_CASE("Cholesky of a 2x2 example") {
  Matrix<double> b(2, 2);
  b << 4, 2, 2, 3;
  const auto f = cholesky_factor(b);
  CHECK_FALSE(f.inverted);
  CHECK(f.l(0, 0) == 2.0);
  CHECK(f.l(1, 0) == 1.0);
  CHECK(f.l(0, 1) == 0.0);
  CHECK(f.l(1, 1) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  const Matrix<double> llt = f.l * f.l.transpose();
  CHECK((llt - b).cwiseAbs().maxCoeff() <= 4 * unit_roundoff<double>() * 4);
  CHECK(cholesky_factor<double>(Matrix<double>::Identity(5, 5)).l == Matrix<double>::Identity(5, 5));
}

TEST_CASE("Cholesky reports the failing pivot (1-based)") {
  Matrix<double> b(2, 2);
  b << 1, 2, 2, 1;
  try {
    cholesky_factor(b);
    FAIL("expected NotPositiveDefinite");
  } catch (const NotPositiveDefinite& e) {
    CHECK(e.pivot_index() == 2);
  }
  Matrix<double> c = Matrix<double>::Identity(4, 4);
  c(0, 0) = -1;
  CHECK_THROWS_AS(cholesky_factor(c), NotPositiveDefinite);
}

TEST_CASE("Cholesky reconstruction across block sizes") {
  const double eps = unit_roundoff<double>();
  for (Index n : {1, 5, 70, 150}) {
    const auto b = spd(n, 1e3, 10 + static_cast<std::uint64_t>(n));
    for (Index block : {1, 32, 64, 128}) {
      const auto f = cholesky_factor(b, block);
      for (Index j = 1; j < n; ++j) CHECK(f.l.col(j).head(j).cwiseAbs().maxCoeff() == 0.0);
      const Matrix<double> llt = f.l * f.l.transpose();
      CHECK(frobenius_norm(Matrix<double>(llt - b)) <= 50 * n * eps * frobenius_norm(b));
    }
  }
}

TEST_CASE("triangular inversion") {
  CHECK(invert_triangular(CholeskyFactor<double>{Matrix<double>::Identity(3, 3), false}).l ==
        Matrix<double>::Identity(3, 3));
  Matrix<double> d = Matrix<double>::Zero(2, 2);
  d(0, 0) = 2;
  d(1, 1) = 4;
  auto di = invert_triangular(CholeskyFactor<double>{d, false});
  CHECK(di.inverted);
  CHECK(di.l(0, 0) == 0.5);
  CHECK(di.l(1, 1) == 0.25);
  CHECK(di.l(1, 0) == 0.0);

  Matrix<double> l(2, 2);
  l << 2, 0, 1, std::sqrt(2.0);
  const auto li = invert_triangular(CholeskyFactor<double>{l, false});
  CHECK(li.l(0, 0) == doctest::Approx(0.5));
  CHECK(li.l(1, 0) == doctest::Approx(-1 / (2 * std::sqrt(2.0))));
  CHECK(li.l(1, 1) == doctest::Approx(1 / std::sqrt(2.0)));
  CHECK(li.l(0, 1) == 0.0);

  const double eps = unit_roundoff<double>();
  for (Index n : {3, 40, 120}) {
    const auto f = cholesky_factor(spd(n, 100, 3));
    const auto inv = invert_triangular(f);
    const Matrix<double> prod = f.l * inv.l;
    const double bound = 50 * n * eps * frobenius_norm(f.l) * frobenius_norm(inv.l);
    CHECK((prod - Matrix<double>::Identity(n, n)).cwiseAbs().maxCoeff() <= bound);
  }
  CHECK_THROWS_AS(invert_triangular(li), ArgumentError);
  Matrix<double> sing = Matrix<double>::Identity(3, 3);
  sing(1, 1) = 0;
  try {
    invert_triangular(CholeskyFactor<double>{sing, false});
    FAIL("expected SingularFactor");
  } catch (const SingularFactor& e) {
    CHECK(e.index() == 2);
  }
}

TEST_CASE("reduce_to_standard: scalar congruences") {
  const auto a = random_symmetric(6, 2);
  const CholeskyFactor<double> id{Matrix<double>::Identity(6, 6), true};
  CHECK(testing::bitwise_equal(reduce_to_standard(a, id), a));
  const CholeskyFactor<double> half{Matrix<double>(0.5 * Matrix<double>::Identity(6, 6)), true};
  CHECK(testing::bitwise_equal(reduce_to_standard(a, half), Matrix<double>(a / 4)));
  CHECK_THROWS_AS(reduce_to_standard(a, CholeskyFactor<double>{Matrix<double>::Identity(6, 6), false}), ArgumentError);
  CHECK_THROWS_AS(reduce_to_standard(Matrix<double>(random_symmetric(5, 1)), id), ArgumentError);
}

TEST_CASE("reduce_to_standard: spectrum equals the pencil spectrum (bisection oracle)") {
  const Index n = 6;
  const auto a = random_symmetric(n, 21);
  const auto b = spd(n, 50, 22);
  const auto linv = invert_triangular(cholesky_factor(b));
  const auto at = reduce_to_standard(a, linv);
  CHECK(is_symmetric(at));
  const auto t = tridiagonalize(at);
  const auto got = oracle::sturm_eigenvalues(t.form.d, t.form.e);
  const auto ref = oracle::pencil_eigenvalues(a, b, -100, 100);
  for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i] == doctest::Approx(ref[i]).epsilon(1e-12));
}

TEST_CASE("back_transform_generalized") {
  const auto v = random_symmetric(5, 3);
  const CholeskyFactor<double> id{Matrix<double>::Identity(5, 5), true};
  CHECK(testing::bitwise_equal(back_transform_generalized(v, id), v));
  Matrix<double> d = Matrix<double>::Zero(5, 5);
  for (Index i = 0; i < 5; ++i) d(i, i) = 1.0 + static_cast<double>(i);
  const auto scaled = back_transform_generalized(v, CholeskyFactor<double>{d, true});
  for (Index j = 0; j < 5; ++j)
    for (Index i = 0; i < 5; ++i) CHECK(scaled(i, j) == v(i, j) * d(i, i));
  CHECK(back_transform_generalized(Matrix<double>(5, 0), id).cols() == 0);
  CHECK_THROWS_AS(back_transform_generalized(Matrix<double>(4, 2), id), ArgumentError);
}

TEST_CASE("single precision factorization") {
  const auto b = spd(30, 10, 4);
  const auto f = cholesky_factor(convert_precision<float>(b, ConvertMethod::block));
  const Matrix<double> l = f.l.cast<double>();
  const Matrix<double> llt = l * l.transpose();
  CHECK(frobenius_norm(Matrix<double>(llt - b)) <= 50 * 30 * unit_roundoff<float>() * frobenius_norm(b));
}
