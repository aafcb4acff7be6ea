#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "evp/instrument.hpp"
#include "evp/matrix.hpp"
#include "evp/tridiag_solver.hpp"

namespace testing {

using evp::Index;
using evp::Matrix;

/// Largest ||A v_i - lambda_i v_i||_2 over the returned pairs.
template <typename S>
double max_residual(const Matrix<double>& a, const evp::Vector<S>& values, const Matrix<S>& vectors) {
  const Matrix<double> v = vectors.template cast<double>();
  double worst = 0;
  for (Index j = 0; j < v.cols(); ++j) {
    const evp::Vector<double> r = a * v.col(j) - static_cast<double>(values[j]) * v.col(j);
    worst = std::max(worst, r.norm());
  }
  return worst;
}

template <typename S>
double orthogonality(const Matrix<S>& vectors) {
  const Matrix<double> v = vectors.template cast<double>();
  const Matrix<double> g = v.transpose() * v - Matrix<double>::Identity(v.cols(), v.cols());
  return v.cols() == 0 ? 0.0 : g.cwiseAbs().maxCoeff();
}

inline double generalized_residual(const Matrix<double>& a, const Matrix<double>& b,
                                   const evp::Vector<double>& values, const Matrix<double>& v) {
  const Matrix<double> r = a * v - b * v * values.head(v.cols()).asDiagonal();
  return r.norm();
}

inline double b_orthogonality(const Matrix<double>& b, const Matrix<double>& v) {
  const Matrix<double> g = v.transpose() * b * v - Matrix<double>::Identity(v.cols(), v.cols());
  return v.cols() == 0 ? 0.0 : g.cwiseAbs().maxCoeff();
}

inline bool bitwise_equal(const Matrix<double>& x, const Matrix<double>& y) {
  return x.rows() == y.rows() && x.cols() == y.cols() &&
         std::equal(x.data(), x.data() + x.size(), y.data());
}

inline bool bitwise_equal(const evp::Vector<double>& x, const evp::Vector<double>& y) {
  return x.size() == y.size() && std::equal(x.data(), x.data() + x.size(), y.data());
}

/// Clock whose next solve appears to last exactly `arm(d)` nanoseconds: the
/// first reading after arming returns t, every later one t + d.
class FakeClock final : public evp::Clock {
 public:
  void arm(std::int64_t duration_ns) {
    base_ += 1'000'000'000;
    duration_ = duration_ns;
    first_ = true;
  }
  std::int64_t now_ns() override {
    if (first_) {
      first_ = false;
      return base_;
    }
    return base_ + duration_;
  }

 private:
  std::int64_t base_ = 0;
  std::int64_t duration_ = 0;
  bool first_ = true;
};

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("evp_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testing
