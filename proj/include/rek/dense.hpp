#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "rek/errors.hpp"

namespace rek {

// Minimal dense row-major double matrix; all the linear algebra here is
// matrix assembly and slicing, so no external library is pulled in.
class Mat {
 public:
  Mat() = default;
  Mat(size_t rows, size_t cols, double fill = 0.0) : rows_(rows), cols_(cols), d_(rows * cols, fill) {}

  size_t rows() const { return rows_; }
  size_t cols() const { return cols_; }

  double& operator()(size_t i, size_t j) { return d_[i * cols_ + j]; }
  double operator()(size_t i, size_t j) const { return d_[i * cols_ + j]; }

  double* row(size_t i) { return d_.data() + i * cols_; }
  const double* row(size_t i) const { return d_.data() + i * cols_; }

  double* data() { return d_.data(); }
  const double* data() const { return d_.data(); }
  size_t size() const { return d_.size(); }

  bool same_shape(const Mat& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

  double max_abs_diff(const Mat& o) const {
    if (!same_shape(o)) throw DimensionMismatch("max_abs_diff: shape mismatch");
    double m = 0.0;
    for (size_t k = 0; k < d_.size(); ++k) m = std::max(m, std::fabs(d_[k] - o.d_[k]));
    return m;
  }

  double max_asymmetry() const {
    if (rows_ != cols_) throw DimensionMismatch("max_asymmetry: matrix not square");
    double m = 0.0;
    for (size_t i = 0; i < rows_; ++i)
      for (size_t j = i + 1; j < cols_; ++j)
        m = std::max(m, std::fabs((*this)(i, j) - (*this)(j, i)));
    return m;
  }

  Mat submatrix(const std::vector<size_t>& rows, const std::vector<size_t>& cols) const {
    Mat out(rows.size(), cols.size());
    for (size_t i = 0; i < rows.size(); ++i)
      for (size_t j = 0; j < cols.size(); ++j) out(i, j) = (*this)(rows[i], cols[j]);
    return out;
  }

 private:
  size_t rows_ = 0, cols_ = 0;
  std::vector<double> d_;
};

inline uint64_t fnv1a64(const void* data, size_t n, uint64_t h = 0xcbf29ce484222325ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

inline uint64_t checksum(const Mat& m) {
  uint64_t h = fnv1a64(&m, 0);  // seed only
  uint64_t dims[2] = {m.rows(), m.cols()};
  h = fnv1a64(dims, sizeof(dims), h);
  return fnv1a64(m.data(), m.size() * sizeof(double), h);
}

inline std::string hex64(uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[static_cast<size_t>(i)] = digits[v & 0xf];
    v >>= 4;
  }
  return s;
}

// True when m + tol*I admits a Cholesky factorization, i.e. the smallest
// eigenvalue exceeds -tol. Used by tests and audit on gram blocks.
bool is_positive_semidefinite(const Mat& m, double tol);

}  // namespace rek
