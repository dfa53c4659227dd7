#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "trafficlab/capacity_jam.hpp"

using namespace traffic;

namespace {
CarGeometry geom(double d, double d0, std::function<double(double)> hw, int lanes = 1) {
  CarGeometry g;
  g.d = d;
  g.d0_plus = d0;
  g.headway = std::move(hw);
  g.lanes = lanes;
  return g;
}
}  // namespace

TEST_CASE("flow density direct evaluations and lane linearity") {
  auto zero_gap = geom(5.0, 0.0, [](double) { return 0.0; });
  CHECK(flow_density(zero_gap, 7.0) == doctest::Approx(0.2));
  auto linear = geom(5.0, 0.0, [](double v) { return 1.5 * v; });
  CHECK(flow_density(linear, 30.0) == doctest::Approx(0.02));
  auto twolane = geom(5.0, 0.0, [](double v) { return 1.5 * v; }, 2);
  CHECK(flow_density(twolane, 30.0) == doctest::Approx(0.04));
}

TEST_CASE("geometry validation") {
  Rng rng(1);
  auto bad = geom(0.0, 0.0, [](double) { return 1.0; });
  CHECK_THROWS_AS(flow_density(bad, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(headway_from_table({1.0, 1.0}, {0.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(headway_from_table({0.0, 1.0}, {2.0, 1.0}), std::invalid_argument);
  auto tab = headway_from_table({0.0, 10.0, 20.0}, {1.0, 2.0, 4.0});
  CHECK(tab(-5.0) == doctest::Approx(1.0));
  CHECK(tab(5.0) == doctest::Approx(1.5));
  CHECK(tab(15.0) == doctest::Approx(3.0));
  CHECK(tab(25.0) == doctest::Approx(4.0));
}

TEST_CASE("capacity: monotone current peaks at the right endpoint") {
  auto g = geom(5.0, 0.0, [](double v) { return 1.5 * v; });
  auto r = road_capacity(g, 0.0, 30.0);
  CHECK(r.J_max == doctest::Approx(0.6).epsilon(1e-10));
  CHECK(r.v_at == doctest::Approx(30.0).epsilon(1e-9));
}

TEST_CASE("capacity: interior maximum matches the calculus oracle") {
  // v/(1+v^2) is stationary where 1 - v^2 = 0, giving v = 1 and J = 1/2
  auto g = geom(1.0, 0.0, [](double v) { return v * v; });
  auto r = road_capacity(g, 0.0, 10.0);
  CHECK(r.v_at == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(r.J_max == doctest::Approx(0.5).epsilon(1e-10));

  // returned point is a genuine local max on the grid scale
  double step = 10.0 / 10000.0;
  auto J = [&](double v) { return v * flow_density(g, v); };
  CHECK(J(r.v_at) >= J(r.v_at - step) - 1e-12);
  CHECK(J(r.v_at) >= J(r.v_at + step) - 1e-12);
}

TEST_CASE("capacity: degenerate interval and errors") {
  auto g = geom(2.0, 0.0, [](double v) { return v; });
  auto r = road_capacity(g, 3.0, 3.0);
  CHECK(r.v_at == 3.0);
  CHECK(r.J_max == doctest::Approx(3.0 / 5.0));
  CHECK_THROWS_AS(road_capacity(g, 2.0, 1.0), std::invalid_argument);
  auto shrinking = geom(2.0, 0.0, [](double v) { return 10.0 - v; });
  CHECK_THROWS_AS(road_capacity(shrinking, 0.0, 5.0), std::invalid_argument);
}

TEST_CASE("jam growth rate: direct values, boundary, monotonicity") {
  auto g = geom(1.0, 1.0, [](double) { return 3.0; });
  CHECK(jam_growth_rate(g, 1.0) == doctest::Approx(1.0));
  CHECK(jam_growth_rate(g, 0.0) == 0.0);
  CHECK(jam_growth_rate(g, 2.0) == doctest::Approx(2.0));

  auto tight = geom(1.0, 3.0, [](double) { return 3.0; });
  CHECK_THROWS_AS(jam_growth_rate(tight, 1.0), std::domain_error);

  double prev = -1.0;
  for (double d0 : {0.0, 0.5, 1.0, 1.5, 2.0}) {
    auto gg = geom(1.0, d0, [](double) { return 3.0; });
    double rate = jam_growth_rate(gg, 1.0);
    CHECK(rate > prev);
    prev = rate;
  }
  prev = 1e300;
  for (double dp : {1.5, 2.0, 3.0, 5.0}) {
    auto gg = geom(1.0, 1.0, [dp](double) { return dp; });
    double rate = jam_growth_rate(gg, 1.0);
    CHECK(rate < prev);
    prev = rate;
  }
}

TEST_CASE("jam simulation tracks the analytic slope") {
  Rng rng(9);
  auto g = geom(1.0, 0.5, [](double) { return 2.0; });
  double rate = jam_growth_rate(g, 2.0);
  CHECK(rate == doctest::Approx(2.0));
  auto tr = simulate_jam(g, 2.0, 1e4, rng);
  CHECK(std::abs(tr.value_at(1e4) / 1e4 - rate) < 0.02 * rate);

  // error halves (at least) when the horizon grows tenfold
  auto g1 = geom(1.0, 1.0, [](double) { return 3.0; });
  auto tr1 = simulate_jam(g1, 1.0, 1e4, rng);
  double e3 = std::abs(tr1.value_at(1e3) / 1e3 - 1.0);
  double e4 = std::abs(tr1.value_at(1e4) / 1e4 - 1.0);
  CHECK(tr1.value_at(1e4) / 1e4 == doctest::Approx(1.0).epsilon(0.02));
  CHECK(e4 <= 0.5 * e3 + 1e-12);

  // before the second car arrives the jam is one car footprint
  auto early = simulate_jam(g1, 1.0, 1e-9, rng);
  REQUIRE(early.times.size() == 1);
  CHECK(early.lengths[0] == doctest::Approx(1.0));
  CHECK(early.value_at(0.0) == doctest::Approx(1.0));

  // slope is linear in the approach speed
  auto fast = simulate_jam(g1, 2.0, 1e4, rng);
  CHECK(fast.value_at(1e4) / 1e4 == doctest::Approx(2.0).epsilon(0.02));
}

TEST_CASE("jam simulation with renewal headways") {
  Rng rng(10);
  auto g = geom(1.0, 1.0, [](double) { return 3.0; });
  auto gapmix = DistributionSpec::make_uniform(2.0, 4.0);  // mean 3, matches above
  auto tr = simulate_jam(g, 1.0, 1e4, rng, &gapmix);
  CHECK(tr.value_at(1e4) / 1e4 == doctest::Approx(1.0).epsilon(0.02));
  auto tootight = DistributionSpec::make_uniform(0.5, 4.0);
  CHECK_THROWS_AS(simulate_jam(g, 1.0, 10.0, rng, &tootight), std::domain_error);
}

TEST_CASE("bottleneck classification") {
  auto grow = classify_bottleneck(0.8, 0.5);
  CHECK(grow.regime == Regime::growing_jam);
  CHECK(grow.growth_rate == doctest::Approx(0.3));
  CHECK(classify_bottleneck(0.0, 0.5).regime == Regime::free_flow);
  CHECK(classify_bottleneck(0.0, 0.0).regime == Regime::free_flow);
  CHECK(classify_bottleneck(0.4, 0.5).regime == Regime::delay);
  CHECK(classify_bottleneck(0.2, 0.5).regime == Regime::free_flow);
  CHECK(classify_bottleneck(0.25, 0.5).regime == Regime::delay);  // boundary is inclusive
  CHECK(classify_bottleneck(0.5, 0.5).regime == Regime::delay);
  CHECK(classify_bottleneck(0.3, 0.5, 0.9).regime == Regime::free_flow);
  CHECK_THROWS_AS(classify_bottleneck(-0.1, 0.5), std::invalid_argument);
}

TEST_CASE("widening time gain") {
  CHECK(widening_time_gain(100.0, 10.0, 10.0) == 0.0);
  CHECK(widening_time_gain(100.0, 10.0, 20.0) == doctest::Approx(5.0));
  CHECK(widening_time_gain(100.0, 20.0, 10.0) < 0.0);
  CHECK_THROWS_AS(widening_time_gain(100.0, 0.0, 10.0), std::invalid_argument);
  CHECK_THROWS_AS(widening_time_gain(100.0, 10.0, -1.0), std::invalid_argument);
}
