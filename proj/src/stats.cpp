#include "trafficlab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/distributions/chi_squared.hpp>

namespace traffic {

double RunningStat::stderr_mean() const {
  if (n < 2) return 0.0;
  return std::sqrt(variance() / static_cast<double>(n));
}

double kolmogorov_tail(double x) {
  if (x <= 0.0) return 1.0;
  if (x < 1.18) {
    // Jacobi theta form, fast for small arguments
    double t = std::exp(-M_PI * M_PI / (8.0 * x * x));
    double s = t * (1.0 + std::pow(t, 8) + std::pow(t, 24) + std::pow(t, 48));
    return 1.0 - std::sqrt(2.0 * M_PI) / x * s;
  }
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    double term = 2.0 * ((k % 2) ? 1.0 : -1.0) *
                  std::exp(-2.0 * static_cast<double>(k) * static_cast<double>(k) * x * x);
    sum += term;
    if (std::abs(term) < 1e-16) break;
  }
  return std::max(sum, 0.0);
}

KsResult ks_test(std::vector<double> sample, const std::function<double(double)>& cdf) {
  if (sample.empty()) throw std::invalid_argument("ks_test: empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    double F = cdf(sample[i]);
    d = std::max(d, std::abs(F - static_cast<double>(i) / n));
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - F));
  }
  return {d, kolmogorov_tail(std::sqrt(n) * d)};
}

KsResult ks_test_two(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_test_two: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= v) ++i;
    while (j < b.size() && b[j] <= v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  double neff = std::sqrt(na * nb / (na + nb));
  return {d, kolmogorov_tail(neff * d)};
}

double tv_distance(const std::vector<double>& p, const std::vector<double>& q) {
  if (p.size() != q.size()) throw std::invalid_argument("tv_distance: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
  return 0.5 * s;
}

double chi_square_independence_pvalue(double n00, double n01, double n10, double n11) {
  double n = n00 + n01 + n10 + n11;
  double r0 = n00 + n01, r1 = n10 + n11;
  double c0 = n00 + n10, c1 = n01 + n11;
  if (r0 <= 0 || r1 <= 0 || c0 <= 0 || c1 <= 0) return 1.0;
  double stat = 0.0;
  const double obs[2][2] = {{n00, n01}, {n10, n11}};
  const double rows[2] = {r0, r1}, cols[2] = {c0, c1};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      double e = rows[i] * cols[j] / n;
      double d = obs[i][j] - e;
      stat += d * d / e;
    }
  boost::math::chi_squared dist(1.0);
  return boost::math::cdf(boost::math::complement(dist, stat));
}

double sample_covariance(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("sample_covariance: need paired samples, size >= 2");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - mx) * (y[i] - my);
  return s / (n - 1.0);
}

double jackknife_cov_se(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 3) throw std::invalid_argument("jackknife_cov_se: need at least 3 pairs");
  double sx = 0.0, sy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
    sxy += x[i] * y[i];
  }
  std::vector<double> loo(n);
  const double m = static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    double mx = (sx - x[i]) / m, my = (sy - y[i]) / m;
    loo[i] = ((sxy - x[i] * y[i]) - m * mx * my) / (m - 1.0);
  }
  double mean = 0.0;
  for (double v : loo) mean += v;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double v : loo) var += (v - mean) * (v - mean);
  var *= m / static_cast<double>(n);
  return std::sqrt(var);
}

}  // namespace traffic
