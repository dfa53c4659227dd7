#pragma once
#include <functional>
#include <vector>

#include "trafficlab/distribution.hpp"
#include "trafficlab/rng.hpp"

namespace traffic {

// Road geometry: car length d, standstill clear gap d0_plus, lane count, and
// the speed-dependent moving clear gap D+(v) (nondecreasing).
struct CarGeometry {
  double d = 0.0;
  double d0_plus = 0.0;
  std::function<double(double)> headway;
  int lanes = 1;
};

void validate(const CarGeometry& geom);

// Piecewise-linear D+(v) through (speeds[i], gaps[i]); both sequences must be
// nondecreasing (speeds strictly). Clamped outside the table range.
std::function<double(double)> headway_from_table(std::vector<double> speeds,
                                                 std::vector<double> gaps);

// Cars per unit length at common speed v: lanes / (d + D+(v)).
double flow_density(const CarGeometry& geom, double v);

struct CapacityResult {
  double J_max = 0.0;
  double v_at = 0.0;
};

// Maximum of the current v * flow_density(v) over [v_lo, v_hi]:
// dense grid, then golden-section refinement around the best cell.
CapacityResult road_capacity(const CarGeometry& geom, double v_lo, double v_hi,
                             std::size_t grid = 10000);

// Length growth rate of the stopped column behind a blockage when cars arrive
// at speed v with moving gap d_plus = D+(v): v (d + d0_plus) / (d_plus - d0_plus).
// Requires d_plus > d0_plus; at the boundary the incoming spacing is already
// jam spacing and the rate is unbounded.
double jam_growth_rate(const CarGeometry& geom, double v);

// Step trace of the jam length: times[i] is the i-th stop event, lengths[i]
// the occupied extent from the obstacle to the last stopped tail bumper.
struct JamTrace {
  std::vector<double> times;
  std::vector<double> lengths;
  double value_at(double t) const;  // right-continuous step function
};

// Car stream at speed v toward a wall at x = 0; each car halts d0_plus behind
// its predecessor's tail. Moving gaps are D+(v) or, when moving_gap is given,
// i.i.d. draws from it (support must stay above d0_plus).
JamTrace simulate_jam(const CarGeometry& geom, double v, double t_max, Rng& rng,
                      const DistributionSpec* moving_gap = nullptr);

enum class Regime { free_flow, delay, growing_jam };

struct BottleneckClass {
  Regime regime = Regime::free_flow;
  double growth_rate = 0.0;  // cars per unit time, growing_jam only
};

// growing_jam iff the incoming current exceeds the maximal outgoing one (the
// queue then grows at J_in - J_out_max cars per unit time); free when the
// road is loaded below free_threshold of capacity; delay in between. The
// delay regime is a label only, no dynamics are attached to it.
BottleneckClass classify_bottleneck(double J_in, double J_out_max,
                                    double free_threshold = 0.5);

// Time gained on a segment of length L when its speed rises from v to v1.
double widening_time_gain(double L, double v, double v1);

}  // namespace traffic
