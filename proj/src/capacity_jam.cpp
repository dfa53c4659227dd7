#include "trafficlab/capacity_jam.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "trafficlab/numerics.hpp"

namespace traffic {

void validate(const CarGeometry& geom) {
  if (!(geom.d > 0.0)) throw std::invalid_argument("car length must be positive");
  if (!(geom.d0_plus >= 0.0)) throw std::invalid_argument("standstill gap must be nonnegative");
  if (geom.lanes < 1) throw std::invalid_argument("lane count must be positive");
  if (!geom.headway) throw std::invalid_argument("headway function missing");
}

std::function<double(double)> headway_from_table(std::vector<double> speeds,
                                                 std::vector<double> gaps) {
  if (speeds.size() != gaps.size() || speeds.empty())
    throw std::invalid_argument("headway table: need matching nonempty columns");
  for (std::size_t i = 1; i < speeds.size(); ++i) {
    if (!(speeds[i] > speeds[i - 1]))
      throw std::invalid_argument("headway table: speeds must be strictly increasing");
    if (gaps[i] < gaps[i - 1])
      throw std::invalid_argument("headway table: gaps must be nondecreasing");
  }
  return [s = std::move(speeds), g = std::move(gaps)](double v) {
    if (v <= s.front()) return g.front();
    if (v >= s.back()) return g.back();
    auto it = std::upper_bound(s.begin(), s.end(), v);
    std::size_t i = static_cast<std::size_t>(it - s.begin());
    double w = (v - s[i - 1]) / (s[i] - s[i - 1]);
    return g[i - 1] + w * (g[i] - g[i - 1]);
  };
}

double flow_density(const CarGeometry& geom, double v) {
  validate(geom);
  return static_cast<double>(geom.lanes) / (geom.d + geom.headway(v));
}

CapacityResult road_capacity(const CarGeometry& geom, double v_lo, double v_hi,
                             std::size_t grid) {
  validate(geom);
  if (!(v_lo <= v_hi)) throw std::invalid_argument("capacity: empty speed interval");
  auto J = [&](double v) { return v * flow_density(geom, v); };
  if (v_lo == v_hi) return {J(v_lo), v_lo};

  double best_v = v_lo, best_J = J(v_lo), prev_gap = -1.0;
  for (std::size_t i = 0; i <= grid; ++i) {
    double v = v_lo + (v_hi - v_lo) * static_cast<double>(i) / static_cast<double>(grid);
    double gap = geom.headway(v);
    if (gap < prev_gap - 1e-9 * (1.0 + std::abs(prev_gap)))
      throw std::invalid_argument("capacity: headway function decreases");
    prev_gap = gap;
    double j = J(v);
    if (j > best_J) {
      best_J = j;
      best_v = v;
    }
  }
  double step = (v_hi - v_lo) / static_cast<double>(grid);
  double lo = std::max(v_lo, best_v - step), hi = std::min(v_hi, best_v + step);
  double refined = golden_max(J, lo, hi, 1e-12 * (1.0 + v_hi));
  for (double cand : {refined, v_lo, v_hi}) {
    double j = J(cand);
    if (j > best_J) {
      best_J = j;
      best_v = cand;
    }
  }
  return {best_J, best_v};
}

double jam_growth_rate(const CarGeometry& geom, double v) {
  validate(geom);
  double d_plus = geom.headway(v);
  if (!(d_plus > geom.d0_plus))
    throw std::domain_error("jam rate undefined: moving gap does not exceed standstill gap");
  return v * (geom.d + geom.d0_plus) / (d_plus - geom.d0_plus);
}

double JamTrace::value_at(double t) const {
  auto it = std::upper_bound(times.begin(), times.end(), t);
  if (it == times.begin()) return 0.0;
  return lengths[static_cast<std::size_t>(it - times.begin()) - 1];
}

JamTrace simulate_jam(const CarGeometry& geom, double v, double t_max, Rng& rng,
                      const DistributionSpec* moving_gap) {
  validate(geom);
  if (!(v > 0.0)) throw std::invalid_argument("jam simulation needs positive approach speed");
  if (!(t_max >= 0.0)) throw std::invalid_argument("jam simulation: t_max must be nonnegative");
  if (moving_gap) {
    require_positive_gap(*moving_gap, "moving gap");
    if (!(moving_gap->support_min() > geom.d0_plus))
      throw std::domain_error("moving gap law must stay above the standstill gap");
  } else if (!(geom.headway(v) > geom.d0_plus)) {
    throw std::domain_error("jam rate undefined: moving gap does not exceed standstill gap");
  }

  JamTrace trace;
  // car 1 halts at the wall at t = 0; car i halts once it has closed the
  // cumulative slack sum_{j<i} (g_j - d0_plus) at speed v
  double t = 0.0;
  double slack = 0.0;
  std::size_t i = 0;
  const double unit = geom.d + geom.d0_plus;
  while (t <= t_max) {
    trace.times.push_back(t);
    trace.lengths.push_back(static_cast<double>(i) * unit + geom.d);
    ++i;
    double g = moving_gap ? moving_gap->sample(rng) : geom.headway(v);
    slack += g - geom.d0_plus;
    t = slack / v;
  }
  return trace;
}

BottleneckClass classify_bottleneck(double J_in, double J_out_max, double free_threshold) {
  if (J_in < 0.0 || J_out_max < 0.0)
    throw std::invalid_argument("currents must be nonnegative");
  if (!(free_threshold > 0.0 && free_threshold <= 1.0))
    throw std::invalid_argument("free threshold must lie in (0,1]");
  if (J_in > J_out_max) return {Regime::growing_jam, J_in - J_out_max};
  if (J_in == 0.0 || J_in < free_threshold * J_out_max) return {Regime::free_flow, 0.0};
  return {Regime::delay, 0.0};
}

double widening_time_gain(double L, double v, double v1) {
  if (!(v > 0.0) || !(v1 > 0.0)) throw std::invalid_argument("speeds must be positive");
  if (!(L >= 0.0)) throw std::invalid_argument("segment length must be nonnegative");
  return L / v - L / v1;
}

}  // namespace traffic
