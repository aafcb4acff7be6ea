#include "evp/matrix_io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace evp {
namespace {

constexpr std::array<char, 4> kMagic{'E', 'V', 'P', '1'};
constexpr std::size_t kHeaderSize = 4 + 4 + 8 + 1 + 1;

template <typename T>
void put_le(std::vector<char>& out, T value) {
  std::array<char, sizeof(T)> bytes;
  std::memcpy(bytes.data(), &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  out.insert(out.end(), bytes.begin(), bytes.end());
}

template <typename T>
T get_le(const char* p) {
  std::array<char, sizeof(T)> bytes;
  std::memcpy(bytes.data(), p, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  T value;
  std::memcpy(&value, bytes.data(), sizeof(T));
  return value;
}

template <typename Scalar>
Matrix<Scalar> decode_payload(const char* p, Index n, const std::filesystem::path& path) {
  Matrix<Scalar> m(n, n);
  for (Index i = 0; i < m.size(); ++i) {
    const Scalar v = get_le<Scalar>(p + i * static_cast<Index>(sizeof(Scalar)));
    if (!std::isfinite(v))
      throw FormatError(path.string() + ": non-finite value at element " + std::to_string(i));
    m.data()[i] = v;
  }
  return m;
}

}  // namespace

Matrix<double> MatrixFile::to_double() const {
  if (const auto* f = std::get_if<Matrix<float>>(&data))
    return convert_precision<double>(*f, ConvertMethod::block);
  return std::get<Matrix<double>>(data);
}

template <typename Scalar>
void write_matrix_file(const std::filesystem::path& path, const Matrix<Scalar>& m, bool symmetric) {
  if (m.rows() != m.cols()) throw ArgumentError("matrix files hold square matrices only");
  std::vector<char> out;
  out.reserve(kHeaderSize + static_cast<std::size_t>(m.size()) * sizeof(Scalar));
  out.insert(out.end(), kMagic.begin(), kMagic.end());
  put_le<std::uint32_t>(out, kMatrixFileVersion);
  put_le<std::uint64_t>(out, static_cast<std::uint64_t>(m.rows()));
  put_le<std::uint8_t>(out, static_cast<std::uint8_t>(sizeof(Scalar)));
  put_le<std::uint8_t>(out, symmetric ? 1 : 0);
  for (Index i = 0; i < m.size(); ++i) put_le<Scalar>(out, m.data()[i]);

  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw FormatError("cannot open '" + path.string() + "' for writing");
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!file) throw FormatError("failed writing '" + path.string() + "'");
}

template void write_matrix_file<float>(const std::filesystem::path&, const Matrix<float>&, bool);
template void write_matrix_file<double>(const std::filesystem::path&, const Matrix<double>&, bool);

MatrixFile read_matrix_file(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw FormatError("cannot open '" + path.string() + "'");
  const std::vector<char> bytes((std::istreambuf_iterator<char>(file)),
                                std::istreambuf_iterator<char>());
  const std::string where = path.string() + ": ";
  if (bytes.size() < kHeaderSize) throw FormatError(where + "truncated header");
  if (!std::equal(kMagic.begin(), kMagic.end(), bytes.begin()))
    throw FormatError(where + "bad magic, expected \"EVP1\"");
  const char* p = bytes.data() + 4;
  const auto version = get_le<std::uint32_t>(p);
  if (version != kMatrixFileVersion)
    throw FormatError(where + "unsupported version " + std::to_string(version));
  const auto order = get_le<std::uint64_t>(p + 4);
  const auto width = get_le<std::uint8_t>(p + 12);
  const auto flags = get_le<std::uint8_t>(p + 13);
  if (width != 4 && width != 8)
    throw FormatError(where + "precision byte must be 4 or 8, got " + std::to_string(width));
  if (order == 0 || order > (1ULL << 20)) throw FormatError(where + "implausible order");
  const std::uint64_t payload = order * order * width;
  if (bytes.size() - kHeaderSize != payload)
    throw FormatError(where + "payload is " + std::to_string(bytes.size() - kHeaderSize) +
                      " bytes, expected " + std::to_string(payload));

  MatrixFile result;
  result.symmetric = (flags & 1U) != 0;
  const auto n = static_cast<Index>(order);
  const char* body = bytes.data() + kHeaderSize;
  if (width == 4)
    result.data = decode_payload<float>(body, n, path);
  else
    result.data = decode_payload<double>(body, n, path);
  if (result.symmetric) {
    const bool ok = std::visit([](const auto& m) { return is_symmetric(m); }, result.data);
    if (!ok) throw FormatError(where + "flagged symmetric but is not");
  }
  return result;
}

namespace {
constexpr std::array<char, 4> kVectorMagic{'E', 'V', 'P', 'V'};
constexpr std::size_t kVectorHeaderSize = 4 + 4 + 8 + 8;
}  // namespace

void write_vector_file(const std::filesystem::path& path, const Matrix<double>& v) {
  std::vector<char> out;
  out.reserve(kVectorHeaderSize + static_cast<std::size_t>(v.size()) * sizeof(double));
  out.insert(out.end(), kVectorMagic.begin(), kVectorMagic.end());
  put_le<std::uint32_t>(out, 1);
  put_le<std::uint64_t>(out, static_cast<std::uint64_t>(v.rows()));
  put_le<std::uint64_t>(out, static_cast<std::uint64_t>(v.cols()));
  for (Index i = 0; i < v.size(); ++i) put_le<double>(out, v.data()[i]);
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw FormatError("cannot open '" + path.string() + "' for writing");
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!file) throw FormatError("failed writing '" + path.string() + "'");
}

Matrix<double> read_vector_file(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw FormatError("cannot open '" + path.string() + "'");
  const std::vector<char> bytes((std::istreambuf_iterator<char>(file)),
                                std::istreambuf_iterator<char>());
  const std::string where = path.string() + ": ";
  if (bytes.size() < kVectorHeaderSize || !std::equal(kVectorMagic.begin(), kVectorMagic.end(), bytes.begin()))
    throw FormatError(where + "not an eigenvector file");
  const char* p = bytes.data() + 4;
  if (get_le<std::uint32_t>(p) != 1) throw FormatError(where + "unsupported version");
  const auto rows = get_le<std::uint64_t>(p + 4);
  const auto cols = get_le<std::uint64_t>(p + 12);
  if (rows > (1ULL << 20) || cols > rows) throw FormatError(where + "implausible shape");
  if (bytes.size() - kVectorHeaderSize != rows * cols * sizeof(double))
    throw FormatError(where + "payload length does not match the shape");
  Matrix<double> v(static_cast<Index>(rows), static_cast<Index>(cols));
  const char* body = bytes.data() + kVectorHeaderSize;
  for (Index i = 0; i < v.size(); ++i) v.data()[i] = get_le<double>(body + i * 8);
  return v;
}

}  // namespace evp
