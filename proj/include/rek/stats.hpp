#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace rek::stats {

// Regularized upper incomplete gamma Q(a, x); chi-square tail probability is
// Q(dof/2, stat/2).
double gamma_q(double a, double x);

double chi_square_p_value(double statistic, double dof);

// Chi-square goodness of fit of observed bin counts against the uniform
// distribution over the bins.
double chi_square_uniform_p(std::span<const uint64_t> counts);

// Pools all eight byte positions of each word into one 256-bin uniformity
// test; any biased byte lane shows up in the pooled statistic.
double byte_uniformity_p(std::span<const uint64_t> words);

// Two-sample Kolmogorov-Smirnov test; asymptotic p-value.
struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

// One-sample KS against the uniform distribution on [lo, hi].
KsResult ks_uniform(std::vector<double> samples, double lo, double hi);

// Two-sample two-dimensional KS test (Fasano-Franceschini): max quadrant
// discrepancy over both point sets, with the Press et al. p-value
// approximation. Quadratic in the sample sizes.
KsResult ks2d_two_sample(const std::vector<std::pair<double, double>>& a,
                         const std::vector<std::pair<double, double>>& b);

}  // namespace rek::stats
