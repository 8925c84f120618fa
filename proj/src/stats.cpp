#include "rek/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rek::stats {

namespace {

constexpr int kMaxIter = 500;
constexpr double kEps = 3e-15;
constexpr double kFpMin = 1e-300;

// Series representation of P(a, x), valid for x < a + 1.
double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int i = 0; i < kMaxIter; ++i) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::fabs(del) < std::fabs(sum) * kEps) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Continued fraction for Q(a, x), valid for x >= a + 1.
double gamma_q_cf(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kFpMin;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= kMaxIter; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = b + an / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

// Q_KS(lambda) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 lambda^2)
double ks_tail(double lambda) {
  double p = 0.0;
  double sign = 1.0;
  const double l2 = -2.0 * lambda * lambda;
  for (int k = 1; k <= 100; ++k) {
    const double term = sign * 2.0 * std::exp(l2 * k * k);
    p += term;
    if (std::fabs(term) < 1e-12 * std::fabs(p) || std::fabs(term) < 1e-300) break;
    sign = -sign;
  }
  return std::min(1.0, std::max(0.0, p));
}

}  // namespace

double gamma_q(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw std::invalid_argument("gamma_q: bad arguments");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_cf(a, x);
}

double chi_square_p_value(double statistic, double dof) {
  return gamma_q(dof / 2.0, statistic / 2.0);
}

double chi_square_uniform_p(std::span<const uint64_t> counts) {
  if (counts.size() < 2) throw std::invalid_argument("chi_square_uniform_p: need >= 2 bins");
  uint64_t total = 0;
  for (uint64_t c : counts) total += c;
  if (total == 0) throw std::invalid_argument("chi_square_uniform_p: empty sample");
  const double expected = static_cast<double>(total) / static_cast<double>(counts.size());
  double stat = 0.0;
  for (uint64_t c : counts) {
    const double d = static_cast<double>(c) - expected;
    stat += d * d / expected;
  }
  return chi_square_p_value(stat, static_cast<double>(counts.size() - 1));
}

double byte_uniformity_p(std::span<const uint64_t> words) {
  std::vector<uint64_t> counts(256, 0);
  for (uint64_t w : words) {
    for (int b = 0; b < 8; ++b) counts[(w >> (8 * b)) & 0xff]++;
  }
  return chi_square_uniform_p(counts);
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const size_t n1 = a.size(), n2 = b.size();
  size_t i = 0, j = 0;
  double d = 0.0;
  while (i < n1 && j < n2) {
    const double x1 = a[i], x2 = b[j];
    if (x1 <= x2) ++i;
    if (x2 <= x1) ++j;
    const double f1 = static_cast<double>(i) / static_cast<double>(n1);
    const double f2 = static_cast<double>(j) / static_cast<double>(n2);
    d = std::max(d, std::fabs(f1 - f2));
  }

  const double ne = static_cast<double>(n1) * static_cast<double>(n2) /
                    static_cast<double>(n1 + n2);
  const double sqrt_ne = std::sqrt(ne);
  const double lambda = (sqrt_ne + 0.12 + 0.11 / sqrt_ne) * d;

  return KsResult{d, ks_tail(lambda)};
}

KsResult ks_uniform(std::vector<double> samples, double lo, double hi) {
  if (samples.empty() || !(hi > lo)) throw std::invalid_argument("ks_uniform: bad arguments");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (size_t i = 0; i < samples.size(); ++i) {
    const double f = std::min(1.0, std::max(0.0, (samples[i] - lo) / (hi - lo)));
    d = std::max(d, std::fabs(static_cast<double>(i + 1) / n - f));
    d = std::max(d, std::fabs(f - static_cast<double>(i) / n));
  }
  const double sqrt_n = std::sqrt(n);
  return KsResult{d, ks_tail((sqrt_n + 0.12 + 0.11 / sqrt_n) * d)};
}

namespace {

// Fraction of each sample in the four quadrants around (x, y).
void quadrant_fractions(const std::vector<std::pair<double, double>>& pts, double x, double y,
                        double out[4]) {
  size_t q[4] = {0, 0, 0, 0};
  for (const auto& p : pts) {
    const bool right = p.first > x;
    const bool above = p.second > y;
    q[(right ? 1 : 0) + (above ? 2 : 0)]++;
  }
  const double n = static_cast<double>(pts.size());
  for (int i = 0; i < 4; ++i) out[i] = static_cast<double>(q[i]) / n;
}

double pearson_r(const std::vector<std::pair<double, double>>& pts) {
  const double n = static_cast<double>(pts.size());
  double sx = 0, sy = 0;
  for (const auto& p : pts) {
    sx += p.first;
    sy += p.second;
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, syy = 0, sxy = 0;
  for (const auto& p : pts) {
    sxx += (p.first - mx) * (p.first - mx);
    syy += (p.second - my) * (p.second - my);
    sxy += (p.first - mx) * (p.second - my);
  }
  return sxx > 0 && syy > 0 ? sxy / std::sqrt(sxx * syy) : 0.0;
}

}  // namespace

KsResult ks2d_two_sample(const std::vector<std::pair<double, double>>& a,
                         const std::vector<std::pair<double, double>>& b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks2d_two_sample: empty sample");
  double d = 0.0;
  double fa[4], fb[4];
  for (const auto* pts : {&a, &b}) {
    for (const auto& p : *pts) {
      quadrant_fractions(a, p.first, p.second, fa);
      quadrant_fractions(b, p.first, p.second, fb);
      for (int q = 0; q < 4; ++q) d = std::max(d, std::fabs(fa[q] - fb[q]));
    }
  }
  const double n1 = static_cast<double>(a.size()), n2 = static_cast<double>(b.size());
  const double ne = n1 * n2 / (n1 + n2);
  const double sqrt_ne = std::sqrt(ne);
  const double rr = std::sqrt(1.0 - pearson_r(a) * pearson_r(b));
  const double lambda = sqrt_ne * d / (1.0 + rr * (0.25 - 0.75 / sqrt_ne));
  return KsResult{d, ks_tail(lambda)};
}

}  // namespace rek::stats
