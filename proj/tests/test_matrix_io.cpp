#include <doctest.h>

#include <fstream>

#include "evp/matrix_io.hpp"
#include "helpers.hpp"

using namespace evp;

namespace {

std::vector<char> slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spit(const std::filesystem::path& p, const std::vector<char>& bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

TEST_CASE("matrix file round trip in both precisions") {
  const auto dir = testing::scratch_dir("io");
  const auto a = random_symmetric(9, 4);
  write_matrix_file(dir / "a.evp", a, true);
  const auto f = read_matrix_file(dir / "a.evp");
  CHECK(f.precision() == Precision::dp);
  CHECK(f.symmetric);
  CHECK(f.order() == 9);
  CHECK(testing::bitwise_equal(f.to_double(), a));

  const auto af = convert_precision<float>(a, ConvertMethod::block);
  write_matrix_file(dir / "f.evp", af, false);
  const auto g = read_matrix_file(dir / "f.evp");
  CHECK(g.precision() == Precision::sp);
  CHECK_FALSE(g.symmetric);
  CHECK(std::get<Matrix<float>>(g.data) == af);
}

TEST_CASE("matrix file header layout") {
  const auto dir = testing::scratch_dir("io_layout");
  Matrix<double> m(1, 1);
  m(0, 0) = 1.0;
  write_matrix_file(dir / "m.evp", m, true);
  const auto bytes = slurp(dir / "m.evp");
  REQUIRE(bytes.size() == 18 + 8);
  CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "EVP1");
  CHECK(bytes[4] == 1);
  CHECK(bytes[8] == 1);
  CHECK(bytes[16] == 8);
  CHECK(bytes[17] == 1);
  CHECK(static_cast<unsigned char>(bytes[25]) == 0x3F);
  CHECK(static_cast<unsigned char>(bytes[24]) == 0xF0);
}

TEST_CASE("matrix file validation") {
  const auto dir = testing::scratch_dir("io_bad");
  const auto a = random_symmetric(4, 1);
  write_matrix_file(dir / "good.evp", a, true);
  const auto good = slurp(dir / "good.evp");

  CHECK_THROWS_AS(read_matrix_file(dir / "missing.evp"), FormatError);

  auto bad = good;
  bad[0] = 'X';
  spit(dir / "magic.evp", bad);
  CHECK_THROWS_AS(read_matrix_file(dir / "magic.evp"), FormatError);

  bad = good;
  bad.pop_back();
  spit(dir / "short.evp", bad);
  CHECK_THROWS_AS(read_matrix_file(dir / "short.evp"), FormatError);

  bad = good;
  bad[16] = 2;
  spit(dir / "width.evp", bad);
  CHECK_THROWS_AS(read_matrix_file(dir / "width.evp"), FormatError);

  bad = good;
  bad[4] = 2;
  spit(dir / "version.evp", bad);
  CHECK_THROWS_AS(read_matrix_file(dir / "version.evp"), FormatError);

  Matrix<double> asym = a;
  asym(0, 1) += 1;
  write_matrix_file(dir / "asym.evp", asym, true);
  CHECK_THROWS_AS(read_matrix_file(dir / "asym.evp"), FormatError);
  write_matrix_file(dir / "asym_plain.evp", asym, false);
  CHECK_NOTHROW(read_matrix_file(dir / "asym_plain.evp"));

  Matrix<double> nan = a;
  nan(2, 2) = std::nan("");
  write_matrix_file(dir / "nan.evp", nan, false);
  CHECK_THROWS_AS(read_matrix_file(dir / "nan.evp"), FormatError);
}
