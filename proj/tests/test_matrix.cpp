#include <doctest.h>

#include <bit>
#include <cstring>

#include "evp/matrix.hpp"
#include "evp/parallel.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace evp;

TEST_CASE("make_symmetric_with_spectrum: 1x1 reproduces the eigenvalue") {
  Spectrum s(1);
  s << 5;
  const auto a = make_symmetric_with_spectrum(1, s, 123);
  CHECK(a(0, 0) == doctest::Approx(5).epsilon(1e-15));
}

TEST_CASE("make_symmetric_with_spectrum: exact symmetry and trace") {
  for (Index n : {3, 8, 17, 40}) {
    Spectrum s(n);
    for (Index i = 0; i < n; ++i) s[i] = 1.0 + 0.5 * static_cast<double>(i * i % 7);
    const auto a = make_symmetric_with_spectrum(n, s, 7 + static_cast<std::uint64_t>(n));
    CHECK(is_symmetric(a));
    const double bound = 10.0 * n * unit_roundoff<double>() * frobenius_norm(a);
    CHECK(std::abs(a.trace() - s.sum()) <= bound);
  }
  Spectrum s(3);
  s << 1, 1, 4;
  const auto a = make_symmetric_with_spectrum(3, s, 7);
  CHECK(std::abs(a.trace() - 6.0) <= 3 * unit_roundoff<double>() * frobenius_norm(a));
}

TEST_CASE("make_symmetric_with_spectrum: deterministic and seed dependent") {
  Spectrum s(6);
  s << 1, 2, 3, 4, 5, 6;
  const auto a = make_symmetric_with_spectrum(6, s, 11);
  const auto b = make_symmetric_with_spectrum(6, s, 11);
  const auto c = make_symmetric_with_spectrum(6, s, 12);
  CHECK(testing::bitwise_equal(a, b));
  CHECK_FALSE(testing::bitwise_equal(a, c));
}

TEST_CASE("make_symmetric_with_spectrum: size mismatch") {
  Spectrum s(2);
  s << 1, 2;
  CHECK_THROWS_AS(make_symmetric_with_spectrum(3, s, 1), ArgumentError);
  CHECK_THROWS_AS(make_symmetric_with_spectrum(0, Spectrum(0), 1), ArgumentError);
}

TEST_CASE("SplitMix64 reference stream") {
  // First outputs for seed 0 as published with the generator.
  SplitMix64 rng(0);
  CHECK(rng.next() == 0xE220A8397B1DCDAFULL);
  CHECK(rng.next() == 0x6E789E6AA1B965F4ULL);
  CHECK(rng.next() == 0x06C45D188009454FULL);
}

TEST_CASE("convert_precision: one third rounds to nearest binary32") {
  Matrix<double> m(1, 1);
  m(0, 0) = 1.0 / 3.0;
  const auto f = convert_precision<float>(m, ConvertMethod::elementwise);
  CHECK(std::bit_cast<std::uint32_t>(f(0, 0)) == 0x3EAAAAABU);
  const auto back = convert_precision<double>(f, ConvertMethod::elementwise);
  CHECK(back(0, 0) != 1.0 / 3.0);
  CHECK(back(0, 0) == static_cast<double>(0.333333343267440796f));
}

TEST_CASE("convert_precision: widening is exact") {
  Matrix<float> f(2, 2);
  f << 0.1f, -3.5f, 1e-30f, 7e30f;
  for (auto method : {ConvertMethod::elementwise, ConvertMethod::block}) {
    const auto d = convert_precision<double>(f, method);
    for (Index i = 0; i < 4; ++i) CHECK(static_cast<float>(d.data()[i]) == f.data()[i]);
    CHECK(convert_precision<float>(d, method) == f);
  }
}

TEST_CASE("convert_precision: both methods agree bitwise (fuzzed)") {
  SplitMix64 rng(99);
  for (int trial = 0; trial < 1000; ++trial) {
    const Index n = 1 + static_cast<Index>(rng.next() % 64);
    Matrix<double> m(n, n);
    for (Index i = 0; i < m.size(); ++i) {
      const double mag = std::ldexp(1.0, static_cast<int>(rng.next() % 200) - 100);
      m.data()[i] = rng.symmetric_uniform() * mag;
    }
    const auto a = convert_precision<float>(m, ConvertMethod::elementwise);
    const auto b = convert_precision<float>(m, ConvertMethod::block);
    REQUIRE(std::memcmp(a.data(), b.data(), sizeof(float) * static_cast<std::size_t>(a.size())) == 0);
  }
}

TEST_CASE("convert_precision: overflow is reported with its index") {
  Matrix<double> m = Matrix<double>::Zero(3, 3);
  m(2, 1) = 1e300;
  for (auto method : {ConvertMethod::elementwise, ConvertMethod::block}) {
    try {
      (void)convert_precision<float>(m, method);
      FAIL("expected PrecisionOverflow");
    } catch (const PrecisionOverflow& e) {
      CHECK(e.row() == 2);
      CHECK(e.col() == 1);
    }
  }
}

TEST_CASE("blocked_multiply: hand example and identity") {
  Matrix<double> a(2, 2), b(2, 2), c(2, 2);
  a << 1, 2, 3, 4;
  b << 5, 6, 7, 8;
  c << 19, 22, 43, 50;
  CHECK(blocked_multiply(a, b, 1) == c);
  CHECK(blocked_multiply(a, b, 64) == c);
  const auto r = random_symmetric(37, 5);
  CHECK(testing::bitwise_equal(blocked_multiply<double>(r, Matrix<double>::Identity(37, 37), 8), r));
}

TEST_CASE("blocked_multiply: block sizes agree within the reassociation bound") {
  const Index n = 50;
  Matrix<double> a = random_symmetric(n, 1), b = random_symmetric(n, 2);
  a(3, 7) = 2.5;  // not symmetric on purpose
  const auto c1 = blocked_multiply(a, b, 1);
  const auto cn = blocked_multiply(a, b, n);
  const auto ref = oracle::reference_product(a, b);
  const double bound = 10.0 * n * unit_roundoff<double>() * frobenius_norm(a) * frobenius_norm(b);
  CHECK(max_abs(Matrix<double>(c1 - cn)) <= bound);
  CHECK(max_abs(Matrix<double>(c1 - ref)) <= bound);
}

TEST_CASE("blocked_multiply: bitwise stable across repeats and worker counts") {
  const Index n = 160;
  const auto a = random_symmetric(n, 3), b = random_symmetric(n, 4);
  const auto ref = blocked_multiply(a, b, 32);
  for (int workers : {1, 2, 3}) {
    set_worker_count(workers);
    CHECK(testing::bitwise_equal(blocked_multiply(a, b, 32), ref));
  }
  set_worker_count(0);
}

TEST_CASE("blocked_multiply: dimension and block errors") {
  Matrix<double> a(2, 3), b(2, 2);
  CHECK_THROWS_AS(blocked_multiply(a, b, 4), ArgumentError);
  CHECK_THROWS_AS(blocked_multiply(b, b, 0), ArgumentError);
}

TEST_CASE("triangular_multiply_left") {
  const Index n = 24;
  const auto a = random_symmetric(n, 8);
  CHECK(testing::bitwise_equal(triangular_multiply_left<double>(Matrix<double>::Identity(n, n), a, false), a));
  CHECK(testing::bitwise_equal(triangular_multiply_left<double>(Matrix<double>::Identity(n, n), a, true), a));
  const Matrix<double> two = 2 * Matrix<double>::Identity(n, n);
  CHECK(testing::bitwise_equal(triangular_multiply_left(two, a, false), Matrix<double>(2 * a)));

  Matrix<double> l = random_symmetric(n, 9);
  for (Index j = 1; j < n; ++j) l.col(j).head(j).setZero();
  // garbage above the diagonal must be ignored
  Matrix<double> lg = l;
  for (Index j = 1; j < n; ++j) lg.col(j).head(j).setConstant(1e3);
  const double bound = 10.0 * n * unit_roundoff<double>() * frobenius_norm(l) * frobenius_norm(a);
  CHECK(max_abs(Matrix<double>(triangular_multiply_left(lg, a, false) - oracle::reference_product(l, a))) <= bound);
  const Matrix<double> lt = l.transpose();
  CHECK(max_abs(Matrix<double>(triangular_multiply_left(lg, a, true) - oracle::reference_product(lt, a))) <= bound);
  CHECK_THROWS_AS(triangular_multiply_left(l, Matrix<double>(n + 1, 2), false), ArgumentError);
}

TEST_CASE("frobenius_norm and max_abs") {
  Matrix<double> m(2, 2);
  m << 3, 0, -4, 0;
  CHECK(frobenius_norm(m) == doctest::Approx(5.0));
  CHECK(max_abs(m) == 4.0);
  Matrix<double> big(1, 2);
  big << 1e200, 1e200;
  CHECK(frobenius_norm(big) == doctest::Approx(std::sqrt(2.0) * 1e200));
}
