#pragma once
#include <vector>

#include "trafficlab/distribution.hpp"
#include "trafficlab/rng.hpp"

namespace traffic {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double length() const { return hi - lo; }
};

// Point field on the line. Positions ascending, all inside the window.
// marks, when present, is parallel to positions.
struct PointConfiguration {
  std::vector<double> positions;
  std::vector<double> marks;
  Interval window;

  bool marked() const { return !marks.empty(); }
  std::size_t size() const { return positions.size(); }
};

// Homogeneous Poisson field with density rho per unit length.
PointConfiguration sample_poisson(double rho, Interval window, Rng& rng);

// Stationary renewal field: the delay from the left window edge to the first
// point has density (1 - G(s)) / mean, later gaps are i.i.d. with cdf G. The
// restriction to any subwindow has the same law regardless of its placement.
PointConfiguration sample_stationary_renewal(const DistributionSpec& gap, Interval window,
                                             Rng& rng);

// Gaps alternate a, b, a, b, ... starting from the left edge with an a-gap;
// every partial sum inside the window becomes a point.
PointConfiguration sample_alternating(const DistributionSpec& gap_a,
                                      const DistributionSpec& gap_b, Interval window,
                                      Rng& rng);

// I.i.d. marks, independent of positions. Rejects already-marked input.
PointConfiguration attach_marks(const PointConfiguration& config, const DistributionSpec& mark,
                                Rng& rng);

// Distance from t to the next renewal point of an ordinary renewal process
// started at 0, one draw per replica. For t well past transience this is the
// stationary excess law with density (1 - G(s)) / mean.
std::vector<double> forward_recurrence_samples(const DistributionSpec& gap, double t,
                                               std::size_t replicas, Rng& rng);

}  // namespace traffic
