#pragma once
#include <cstddef>
#include <functional>
#include <vector>

namespace traffic {

// Streaming mean/variance (Welford).
struct RunningStat {
  std::size_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++n;
    double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
  }
  double variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
  double stderr_mean() const;
};

// P(sup_t |B(t)| > x) for the Brownian bridge: the limiting law of
// sqrt(n) * D_n. Both series branches, accurate over the whole range.
double kolmogorov_tail(double x);

struct KsResult {
  double statistic = 0.0;  // sup-norm distance
  double p_value = 1.0;    // asymptotic
};

// One-sample Kolmogorov-Smirnov against a continuous cdf.
KsResult ks_test(std::vector<double> sample, const std::function<double(double)>& cdf);
// Two-sample Kolmogorov-Smirnov.
KsResult ks_test_two(std::vector<double> a, std::vector<double> b);

// Total variation distance between two finite distributions on the same index set.
double tv_distance(const std::vector<double>& p, const std::vector<double>& q);

// Pearson chi-square independence test on a 2x2 contingency table.
double chi_square_independence_pvalue(double n00, double n01, double n10, double n11);

double sample_covariance(const std::vector<double>& x, const std::vector<double>& y);

// Standard error of a covariance estimate by delete-one jackknife.
double jackknife_cov_se(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace traffic
