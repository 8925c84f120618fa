#include "rek/kernels.hpp"

namespace rek {

std::string KernelConfig::describe() const {
  switch (kind) {
    case KernelKind::linear:
      return "linear";
    case KernelKind::polynomial:
      return "poly(degree=" + std::to_string(degree) + ",offset=" + std::to_string(offset) + ")";
    case KernelKind::rbf:
      return "rbf(gamma=" + std::to_string(gamma) + ")";
  }
  return "?";
}

Mat kernel_from_gram(const Mat& gram, const KernelConfig& cfg) {
  cfg.validate();
  if (gram.rows() != gram.cols()) throw BadKernel("kernel_from_gram: gram not square");
  const size_t n = gram.rows();
  if (cfg.kind == KernelKind::linear) return gram;

  Mat k(n, n);
  for (size_t i = 0; i < n; ++i) {
    const double g_ii = gram(i, i);
    for (size_t j = i; j < n; ++j) {
      const double v = kernel_entry(cfg, g_ii, gram(i, j), gram(j, j));
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

Mat kernel_block_from_gram(const Mat& gram, const std::vector<size_t>& rows,
                           const std::vector<size_t>& cols, const KernelConfig& cfg) {
  cfg.validate();
  Mat k(rows.size(), cols.size());
  for (size_t i = 0; i < rows.size(); ++i) {
    const size_t ri = rows[i];
    const double g_ii = gram(ri, ri);
    for (size_t j = 0; j < cols.size(); ++j) {
      const size_t cj = cols[j];
      k(i, j) = kernel_entry(cfg, g_ii, gram(ri, cj), gram(cj, cj));
    }
  }
  return k;
}

}  // namespace rek
