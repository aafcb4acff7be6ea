#include <doctest.h>

#include <numbers>

#include "evp/tridiag_solver.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace evp;

namespace {

TridiagonalForm<double> make_form(std::vector<double> d, std::vector<double> e) {
  TridiagonalForm<double> t;
  t.d = Eigen::Map<Vector<double>>(d.data(), static_cast<Index>(d.size()));
  t.e = Eigen::Map<Vector<double>>(e.data(), static_cast<Index>(e.size()));
  return t;
}

TridiagonalForm<double> random_form(Index n, std::uint64_t seed) {
  SplitMix64 rng(seed);
  TridiagonalForm<double> t;
  t.d.resize(n);
  t.e.resize(n - 1);
  for (Index i = 0; i < n; ++i) t.d[i] = rng.symmetric_uniform();
  for (Index i = 0; i + 1 < n; ++i) t.e[i] = rng.symmetric_uniform();
  return t;
}

}  // namespace

TEST_CASE("2x2 analytic case") {
  const auto r = solve_tridiagonal(make_form({2, 2}, {1}), 2);
  CHECK(r.values[0] == doctest::Approx(1.0));
  CHECK(r.values[1] == doctest::Approx(3.0));
  const double h = 1 / std::sqrt(2.0);
  CHECK(std::abs(r.vectors(0, 0)) == doctest::Approx(h));
  CHECK(r.vectors(0, 0) * r.vectors(1, 0) == doctest::Approx(-0.5));
  CHECK(r.vectors(0, 1) * r.vectors(1, 1) == doctest::Approx(0.5));
}

TEST_CASE("1x1 case") {
  const auto r = solve_tridiagonal(make_form({-2.5}, {}), 1);
  CHECK(r.values[0] == -2.5);
  CHECK(r.vectors(0, 0) == 1.0);
}

TEST_CASE("Toeplitz spectrum, eigenvalues only") {
  const auto r = solve_tridiagonal(make_form({2, 2, 2, 2}, {-1, -1, -1}), 0);
  CHECK(r.count() == 0);
  for (int j = 1; j <= 4; ++j) {
    const double exact = 2 - 2 * std::cos(j * std::numbers::pi / 5);
    CHECK(r.values[j - 1] == doctest::Approx(exact).epsilon(1e-14));
  }
  const auto oracle_vals = oracle::sturm_eigenvalues(Vector<double>::Constant(4, 2.0), Vector<double>::Constant(3, -1.0));
  for (int j = 0; j < 4; ++j) CHECK(std::abs(r.values[j] - oracle_vals[static_cast<std::size_t>(j)]) < 1e-14);
}

TEST_CASE("random forms: residual, orthogonality and Sturm oracle") {
  for (Index n : {2, 3, 7, 16, 40, 64}) {
    const auto t = random_form(n, 100 + static_cast<std::uint64_t>(n));
    const auto r = solve_tridiagonal(t, n);
    const Matrix<double> dense = t.to_dense();
    const double tn = frobenius_norm(dense);
    const double eps = unit_roundoff<double>();
    CHECK(testing::max_residual(dense, r.values, r.vectors) <= 30 * n * eps * tn);
    CHECK(testing::orthogonality(r.vectors) <= 30 * n * eps);
    const auto ref = oracle::sturm_eigenvalues(t.d, t.e);
    for (Index j = 0; j < n; ++j) CHECK(std::abs(r.values[j] - ref[static_cast<std::size_t>(j)]) <= 1e-12 * tn);
    for (Index j = 1; j < n; ++j) CHECK(r.values[j - 1] <= r.values[j]);
  }
}

TEST_CASE("sign convention: largest entry of each vector is positive") {
  const auto t = random_form(12, 5);
  const auto r = solve_tridiagonal(t, 12);
  for (Index j = 0; j < 12; ++j) {
    Index arg = 0;
    for (Index i = 1; i < 12; ++i)
      if (std::abs(r.vectors(i, j)) > std::abs(r.vectors(arg, j))) arg = i;
    CHECK(r.vectors(arg, j) > 0);
  }
}

TEST_CASE("partial vector block equals the leading columns of the full block") {
  const auto t = random_form(20, 9);
  const auto all = solve_tridiagonal(t, 20);
  const auto some = solve_tridiagonal(t, 5);
  CHECK(testing::bitwise_equal(all.values, some.values));
  CHECK(testing::bitwise_equal(Matrix<double>(all.vectors.leftCols(5)), some.vectors));
}

TEST_CASE("split problems merge correctly") {
  // two decoupled blocks with interleaving spectra
  auto t = make_form({5, 5, 0, 0, 3}, {1, 0, 2, 1e-30});
  const auto r = solve_tridiagonal(t, 5);
  const auto ref = oracle::sturm_eigenvalues(t.d, t.e);
  for (Index j = 0; j < 5; ++j) CHECK(r.values[j] == doctest::Approx(ref[static_cast<std::size_t>(j)]).epsilon(1e-14));
  CHECK(testing::max_residual(t.to_dense(), r.values, r.vectors) <= 1e-14 * 8);
}

TEST_CASE("graded and degenerate inputs") {
  auto zero = make_form({0, 0, 0}, {0, 0});
  auto r = solve_tridiagonal(zero, 3);
  CHECK(r.values.cwiseAbs().maxCoeff() == 0);
  CHECK(testing::orthogonality(r.vectors) == 0);

  auto graded = make_form({1e10, 1, 1e-10, 1e-20}, {1e5, 1e-5, 1e-15});
  r = solve_tridiagonal(graded, 4);
  const double tn = frobenius_norm(Matrix<double>(graded.to_dense()));
  CHECK(testing::max_residual(graded.to_dense(), r.values, r.vectors) <= 30 * 4 * unit_roundoff<double>() * tn);
}

TEST_CASE("single precision") {
  const auto t = random_form(30, 77);
  TridiagonalForm<float> tf{t.d.cast<float>(), t.e.cast<float>()};
  const auto r = solve_tridiagonal(tf, 30);
  const double eps = unit_roundoff<float>();
  const Matrix<double> dense = tf.to_dense().cast<double>();
  CHECK(testing::max_residual(dense, r.values, r.vectors) <= 30 * 30 * eps * frobenius_norm(dense));
  CHECK(testing::orthogonality(r.vectors) <= 30 * 30 * eps);
}

TEST_CASE("argument checks") {
  CHECK_THROWS_AS(solve_tridiagonal(make_form({1, 2}, {1}), 3), ArgumentError);
  CHECK_THROWS_AS(solve_tridiagonal(make_form({1, 2}, {}), 1), ArgumentError);
  CHECK_THROWS_AS(solve_tridiagonal(make_form({1, std::nan("")}, {1}), 1), ArgumentError);
}
