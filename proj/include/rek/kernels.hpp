#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "rek/dense.hpp"
#include "rek/errors.hpp"

namespace rek {

enum class KernelKind : uint8_t { linear = 0, polynomial = 1, rbf = 2 };

// Kernel derived from dot products alone. For rbf, gamma = 1/(2*sigma^2).
struct KernelConfig {
  KernelKind kind = KernelKind::rbf;
  double gamma = 1.0;    // rbf
  uint32_t degree = 2;   // polynomial
  double offset = 0.0;   // polynomial

  static KernelConfig linear() { return {KernelKind::linear, 0.0, 0, 0.0}; }
  static KernelConfig poly(uint32_t degree, double offset) {
    return {KernelKind::polynomial, 0.0, degree, offset};
  }
  static KernelConfig rbf(double gamma) { return {KernelKind::rbf, gamma, 0, 0.0}; }

  void validate() const {
    if (kind == KernelKind::rbf && !(gamma > 0.0)) {
      throw InvalidConfig("rbf kernel requires gamma > 0");
    }
    if (kind == KernelKind::polynomial && (degree < 1 || offset < 0.0)) {
      throw InvalidConfig("polynomial kernel requires degree >= 1 and offset >= 0");
    }
  }

  std::string describe() const;
};

// Squared distance recovered from dot products; clamped at zero to absorb
// rounding before exponentiation.
inline double squared_distance(double g_ii, double g_ij, double g_jj) {
  return std::max(0.0, g_ii - 2.0 * g_ij + g_jj);
}

inline double kernel_entry(const KernelConfig& cfg, double g_ii, double g_ij, double g_jj) {
  switch (cfg.kind) {
    case KernelKind::linear:
      return g_ij;
    case KernelKind::polynomial: {
      double base = g_ij + cfg.offset;
      double acc = 1.0;
      for (uint32_t p = 0; p < cfg.degree; ++p) acc *= base;
      return acc;
    }
    case KernelKind::rbf:
      return std::exp(-cfg.gamma * squared_distance(g_ii, g_ij, g_jj));
  }
  throw InvalidConfig("unknown kernel kind");
}

// Full kernel matrix from a symmetric gram matrix.
Mat kernel_from_gram(const Mat& gram, const KernelConfig& cfg);

// Kernel block between row samples and column samples, both indices into the
// same gram matrix. Used for validation and test-time prediction.
Mat kernel_block_from_gram(const Mat& gram, const std::vector<size_t>& rows,
                           const std::vector<size_t>& cols, const KernelConfig& cfg);

}  // namespace rek
