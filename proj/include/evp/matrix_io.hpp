#pragma once

#include <filesystem>
#include <variant>

#include "evp/matrix.hpp"

namespace evp {

/// Contents of a binary matrix file.
///
/// Layout (all integers little-endian):
///   bytes 0-3   magic "EVP1"
///   u32         version (= 1)
///   u64         order n
///   u8          element width, 4 (binary32) or 8 (binary64)
///   u8          flags, bit 0 = symmetric
///   n*n values  column-major, little-endian IEEE
struct MatrixFile {
  std::variant<Matrix<float>, Matrix<double>> data;
  bool symmetric = false;

  Precision precision() const noexcept {
    return std::holds_alternative<Matrix<float>>(data) ? Precision::sp : Precision::dp;
  }
  Index order() const noexcept {
    return std::visit([](const auto& m) { return m.rows(); }, data);
  }
  /// Widened (exact for SP payloads) copy.
  Matrix<double> to_double() const;
};

inline constexpr std::uint32_t kMatrixFileVersion = 1;

template <typename Scalar>
void write_matrix_file(const std::filesystem::path& path, const Matrix<Scalar>& m, bool symmetric);

/// Reads and validates magic, version, precision byte, payload length,
/// finiteness and (when flagged) exact symmetry. Throws FormatError.
MatrixFile read_matrix_file(const std::filesystem::path& path);

/// Rectangular eigenvector block (n x k, binary64), used for solver output:
/// magic "EVPV", u32 version (= 1), u64 rows, u64 cols, column-major payload.
void write_vector_file(const std::filesystem::path& path, const Matrix<double>& v);
Matrix<double> read_vector_file(const std::filesystem::path& path);

extern template void write_matrix_file<float>(const std::filesystem::path&, const Matrix<float>&,
                                              bool);
extern template void write_matrix_file<double>(const std::filesystem::path&, const Matrix<double>&,
                                               bool);

}  // namespace evp
