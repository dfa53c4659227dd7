#pragma once
#include <string>
#include <vector>

#include "trafficlab/rng.hpp"

namespace traffic {

enum class DistKind { exponential, deterministic, uniform, discrete, empirical };

// One-dimensional nonnegative law used for gaps, lifetimes, marks, route lengths
// and service times. cdf(x) = P(X <= x). deterministic(+inf) is the documented
// "never happens" value (e.g. bypass prohibited); it is rejected wherever a
// finite mean is required.
struct DistributionSpec {
  DistKind kind = DistKind::deterministic;
  double rate = 0.0;            // exponential
  double value = 0.0;           // deterministic
  double lo = 0.0, hi = 0.0;    // uniform
  std::vector<double> atoms;    // discrete/empirical, ascending after validate
  std::vector<double> weights;  // discrete only, parallel to atoms
  std::vector<double> cum;      // cumulative weights, built by validate

  static DistributionSpec make_exponential(double rate);
  static DistributionSpec make_deterministic(double value);
  static DistributionSpec make_uniform(double lo, double hi);
  static DistributionSpec make_discrete(std::vector<double> atoms, std::vector<double> weights);
  static DistributionSpec make_empirical(std::vector<double> sample);

  bool is_never() const;  // deterministic(+inf)
  double mean() const;
  double second_moment() const;
  double cdf(double x) const;
  double survival(double x) const { return 1.0 - cdf(x); }
  double quantile(double p) const;  // smallest x with cdf(x) >= p
  double support_max() const;       // may be +inf
  double support_min() const;
  double sample(Rng& rng) const;

  DistributionSpec scaled(double c) const;  // law of c*X, c > 0, exact per kind

  std::string describe() const;
  // text forms: exponential(r) | deterministic(v) | inf | uniform(lo,hi)
  //           | discrete(atom:weight, ...) | empirical(x1, x2, ...)
  static DistributionSpec parse(const std::string& text);
};

// throws std::invalid_argument naming the offending field
void validate(const DistributionSpec& d);
// gap-like laws: support in (0, inf), finite positive mean
void require_positive_gap(const DistributionSpec& d, const std::string& what);

// Equilibrium (stationary-excess) law: density survival(t)/mean on the support.
// It is both the stationary renewal first-point delay and the residual lifetime
// seen by an arrival at a stationary random time.
double equilibrium_mean(const DistributionSpec& d);  // m2 / (2 m)
double equilibrium_density(const DistributionSpec& d, double t);
double equilibrium_cdf(const DistributionSpec& d, double t);
// exact sampler: U * (length-biased draw); exponential short-circuits to itself
double equilibrium_sample(const DistributionSpec& d, Rng& rng);

}  // namespace traffic
