#include "trafficlab/pointfield.hpp"

#include <algorithm>
#include <stdexcept>

namespace traffic {

namespace {
void check_window(Interval w) {
  if (!(w.hi > w.lo)) throw std::invalid_argument("window must satisfy lo < hi");
}
}  // namespace

PointConfiguration sample_poisson(double rho, Interval window, Rng& rng) {
  if (rho < 0.0) throw std::invalid_argument("poisson density must be nonnegative");
  check_window(window);
  PointConfiguration out;
  out.window = window;
  long n = rng.poisson(rho * window.length());
  out.positions.resize(static_cast<std::size_t>(n));
  for (auto& x : out.positions) x = rng.uniform(window.lo, window.hi);
  std::sort(out.positions.begin(), out.positions.end());
  return out;
}

PointConfiguration sample_stationary_renewal(const DistributionSpec& gap, Interval window,
                                             Rng& rng) {
  require_positive_gap(gap, "stationary renewal");
  check_window(window);
  PointConfiguration out;
  out.window = window;
  double x = window.lo + equilibrium_sample(gap, rng);
  while (x <= window.hi) {
    out.positions.push_back(x);
    x += gap.sample(rng);
  }
  return out;
}

PointConfiguration sample_alternating(const DistributionSpec& gap_a,
                                      const DistributionSpec& gap_b, Interval window,
                                      Rng& rng) {
  require_positive_gap(gap_a, "alternating field, first law");
  require_positive_gap(gap_b, "alternating field, second law");
  check_window(window);
  PointConfiguration out;
  out.window = window;
  double x = window.lo;
  bool use_a = true;
  for (;;) {
    x += (use_a ? gap_a : gap_b).sample(rng);
    if (x > window.hi) break;
    out.positions.push_back(x);
    use_a = !use_a;
  }
  return out;
}

PointConfiguration attach_marks(const PointConfiguration& config, const DistributionSpec& mark,
                                Rng& rng) {
  if (config.marked()) throw std::logic_error("configuration already carries marks");
  PointConfiguration out = config;
  out.marks.resize(out.positions.size());
  for (auto& m : out.marks) m = mark.sample(rng);
  return out;
}

std::vector<double> forward_recurrence_samples(const DistributionSpec& gap, double t,
                                               std::size_t replicas, Rng& rng) {
  require_positive_gap(gap, "forward recurrence");
  if (!(t >= 0.0)) throw std::invalid_argument("forward recurrence: t must be nonnegative");
  std::vector<double> out(replicas);
  for (auto& v : out) {
    double s = 0.0;
    while (s <= t) s += gap.sample(rng);
    v = s - t;
  }
  return out;
}

}  // namespace traffic
