#include "rek/dense.hpp"

#include <cmath>
#include <vector>

namespace rek {

bool is_positive_semidefinite(const Mat& m, double tol) {
  if (m.rows() != m.cols()) throw DimensionMismatch("is_positive_semidefinite: not square");
  const size_t n = m.rows();
  Mat l(n, n);
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j <= i; ++j) {
      double s = m(i, j) + (i == j ? tol : 0.0);
      for (size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      if (i == j) {
        if (s < 0.0) return false;
        l(i, i) = std::sqrt(s);
      } else {
        l(i, j) = l(j, j) > 0.0 ? s / l(j, j) : 0.0;
      }
    }
  }
  return true;
}

}  // namespace rek
