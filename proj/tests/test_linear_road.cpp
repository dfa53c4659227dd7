#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "trafficlab/linear_road.hpp"
#include "trafficlab/numerics.hpp"
#include "trafficlab/stats.hpp"

using namespace traffic;

namespace {

TandemSpec tandem_base() {
  TandemSpec s;
  s.lambda1 = 0.1;
  s.lambda2 = 0.2;
  s.mu = 1.0;
  s.v1 = 1.0;
  s.v2 = 0.0;
  return s;
}

ObstacleRoadSpec obstacle_base() {
  ObstacleRoadSpec s;
  s.lambda = 0.5;
  s.Q = DistributionSpec::make_exponential(1.0);
  s.F = DistributionSpec::make_deterministic(
      std::numeric_limits<double>::infinity());
  s.v = 1.0;
  return s;
}

SlowCarRoadSpec slow_base() {
  SlowCarRoadSpec s;
  s.lambda = 0.2;
  s.G = DistributionSpec::make_exponential(1.0);
  s.F = DistributionSpec::make_exponential(1.0);
  s.v1 = 2.0;
  s.v2 = 1.0;
  return s;
}

double geometric_mean_occupancy(const std::vector<double>& pmf) {
  double m = 0.0;
  for (std::size_t n = 0; n < pmf.size(); ++n) m += static_cast<double>(n) * pmf[n];
  return m;
}

}  // namespace

TEST_CASE("tandem mean speed closed form") {
  TandemSpec s = tandem_base();
  CHECK(tandem_mean_speed(s) == doctest::Approx(9.0 / 11.0).epsilon(1e-12));
  CHECK(tandem_utilization(s) == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(mean_overtake_time(s) == doctest::Approx(1.0 / 0.9).epsilon(1e-12));

  // same relative picture shifted by the slow-car speed
  TandemSpec sh = s;
  sh.v1 = 1.5;
  sh.v2 = 0.5;
  CHECK(tandem_mean_speed(sh) ==
        doctest::Approx(9.0 / 11.0 + 0.5).epsilon(1e-12));

  TandemSpec fast = s;
  fast.mu = 1e9;
  CHECK(std::abs(tandem_mean_speed(fast) - fast.v1) < 1e-6);

  TandemSpec lonely = s;
  lonely.lambda2 = 0.0;
  CHECK(tandem_mean_speed(lonely) == doctest::Approx(1.0).epsilon(1e-15));

  TandemSpec bad = s;
  bad.lambda1 = 2.0;
  CHECK_THROWS_AS(tandem_mean_speed(bad), std::domain_error);
  TandemSpec order = s;
  order.v2 = 2.0;
  CHECK_THROWS_AS(tandem_mean_speed(order), std::invalid_argument);
  TandemSpec nomu = s;
  nomu.mu = 0.0;
  CHECK_THROWS_AS(validate(nomu), std::invalid_argument);
}

TEST_CASE("queue law behind one slow car") {
  TandemSpec s = tandem_base();
  s.lambda1 = 0.5;
  QueueLaw law = mm1_queue_distribution(s);
  CHECK(law.r == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(law.pmf[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(law.pmf[1] == doctest::Approx(0.25).epsilon(1e-15));
  double sum = 0.0;
  for (double p : law.pmf) sum += p;
  CHECK(sum >= 1.0 - 1e-12);
  CHECK(sum <= 1.0 + 1e-15);
  CHECK(geometric_mean_occupancy(law.pmf) ==
        doctest::Approx(1.0).epsilon(1e-9));  // r/(1-r) at r=1/2

  TandemSpec empty = tandem_base();
  empty.lambda1 = 0.0;
  QueueLaw none = mm1_queue_distribution(empty);
  REQUIRE(none.pmf.size() == 1);
  CHECK(none.pmf[0] == 1.0);

  TandemSpec crowded = tandem_base();
  crowded.lambda1 = 0.9;
  QueueLaw heavy = mm1_queue_distribution(crowded);
  double hsum = 0.0;
  for (double p : heavy.pmf) hsum += p;
  CHECK(hsum >= 1.0 - 1e-12);

  TandemSpec bad = tandem_base();
  bad.lambda1 = 1.5;
  CHECK_THROWS_AS(mm1_queue_distribution(bad), std::domain_error);
}

TEST_CASE("queue occupancy simulation matches the geometric law") {
  Rng rng(20260815);
  std::vector<double> emp = mm1_occupancy_sim(0.5, 1.0, 1000000, rng);
  std::vector<double> geo(emp.size(), 0.0);
  double term = 0.5;
  for (std::size_t n = 0; n < geo.size(); ++n) {
    geo[n] = term;
    term *= 0.5;
  }
  CHECK(tv_distance(emp, geo) < 0.01);

  Rng r2(1);
  std::vector<double> idle = mm1_occupancy_sim(0.0, 1.0, 100, r2);
  REQUIRE(idle.size() == 1);
  CHECK(idle[0] == 1.0);

  Rng r3(2);
  CHECK_THROWS_AS(mm1_occupancy_sim(2.0, 1.0, 10, r3), std::invalid_argument);
}

TEST_CASE("tandem event simulation agrees with the closed form") {
  TandemSpec s = tandem_base();
  Rng rng(77);
  TandemSimResult out = simulate_tandem(s, 1e5, rng);
  CHECK(out.stations > 15000);
  CHECK(std::abs(out.mean_speed - 9.0 / 11.0) < 0.02 * (9.0 / 11.0));

  TandemSpec sh = s;
  sh.v1 = 1.5;
  sh.v2 = 0.5;
  Rng rng2(78);
  TandemSimResult out2 = simulate_tandem(sh, 1e5, rng2);
  double want = 9.0 / 11.0 + 0.5;
  CHECK(std::abs(out2.mean_speed - want) < 0.02 * want);

  Rng ra(9001), rb(9001);
  TandemSimResult xa = simulate_tandem(s, 2e4, ra);
  TandemSimResult xb = simulate_tandem(s, 2e4, rb);
  CHECK(xa.total_time == xb.total_time);
  CHECK(xa.stations == xb.stations);
}

TEST_CASE("residual lifetime law") {
  ResidualLife exp1 = residual_life_density(DistributionSpec::make_exponential(1.0));
  CHECK(exp1.mean == doctest::Approx(1.0).epsilon(1e-12));
  for (double t : {0.0, 0.3, 1.7, 4.0})
    CHECK(exp1.density(t) == doctest::Approx(std::exp(-t)).epsilon(1e-12));

  ResidualLife det2 = residual_life_density(DistributionSpec::make_deterministic(2.0));
  CHECK(det2.mean == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(det2.density(1.0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(det2.density(3.0) == 0.0);

  ResidualLife uni = residual_life_density(DistributionSpec::make_uniform(0.0, 1.0));
  CHECK(uni.mean == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  double first_moment = adaptive_simpson(
      [&](double t) { return t * uni.density(t); }, 0.0, 1.0, 1e-12);
  CHECK(std::abs(first_moment - 1.0 / 3.0) < 1e-10);

  for (const ResidualLife* r : {&exp1, &det2, &uni}) {
    double hi = std::isfinite(r->lifetime.support_max())
                    ? r->lifetime.support_max()
                    : 60.0;
    double mass = adaptive_simpson([&](double t) { return r->density(t); }, 0.0,
                                   hi, 1e-12);
    CHECK(std::abs(mass - 1.0) < 1e-10);
  }

  CHECK_THROWS_AS(residual_life_density(DistributionSpec::make_deterministic(0.0)),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      residual_life_density(DistributionSpec::make_deterministic(
          std::numeric_limits<double>::infinity())),
      std::invalid_argument);
}

TEST_CASE("mean stop duration before one obstacle") {
  DistributionSpec exp1 = DistributionSpec::make_exponential(1.0);
  DistributionSpec never = DistributionSpec::make_deterministic(
      std::numeric_limits<double>::infinity());
  CHECK(obstacle_delay_mean(exp1, never) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(obstacle_delay_mean(exp1, DistributionSpec::make_deterministic(0.0)) ==
        0.0);
  CHECK(std::abs(obstacle_delay_mean(exp1, exp1) - 0.5) < 1e-10);
  // kinked case: bypass after exactly 1, lifetime exactly 2
  CHECK(std::abs(obstacle_delay_mean(DistributionSpec::make_deterministic(2.0),
                                     DistributionSpec::make_deterministic(1.0)) -
                 0.75) < 1e-12);
}

TEST_CASE("obstacle road mean speed") {
  ObstacleRoadSpec s = obstacle_base();
  CHECK(mean_speed_obstacles(s) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));

  ObstacleRoadSpec clear = s;
  clear.lambda = 0.0;
  CHECK(mean_speed_obstacles(clear) == 1.0);

  // slower under more obstacles
  double prev = 1.0;
  for (double lam : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    ObstacleRoadSpec t = s;
    t.lambda = lam;
    double got = mean_speed_obstacles(t);
    CHECK(got < prev);
    prev = got;
  }
  // slower under longer lifetimes
  prev = 1.0;
  for (double m : {0.5, 1.0, 2.0}) {
    ObstacleRoadSpec t = s;
    t.Q = DistributionSpec::make_exponential(1.0 / m);
    double got = mean_speed_obstacles(t);
    CHECK(got < prev);
    prev = got;
  }
  // no bypass: slower under more lifetime spread at fixed mean
  ObstacleRoadSpec w0 = s, w5 = s, w10 = s;
  w0.lambda = w5.lambda = w10.lambda = 0.4;
  w0.Q = DistributionSpec::make_deterministic(1.0);
  w5.Q = DistributionSpec::make_uniform(0.5, 1.5);
  w10.Q = DistributionSpec::make_uniform(0.0, 2.0);
  double v0 = mean_speed_obstacles(w0);
  double v5 = mean_speed_obstacles(w5);
  double v10 = mean_speed_obstacles(w10);
  CHECK(v0 == doctest::Approx(5.0 / 6.0).epsilon(1e-12));
  CHECK(v5 == doctest::Approx(0.821917808219178).epsilon(1e-12));
  CHECK(v10 == doctest::Approx(15.0 / 19.0).epsilon(1e-12));
  CHECK(v5 < v0);
  CHECK(v10 < v5);
}

TEST_CASE("obstacle road simulation") {
  ObstacleRoadSpec s = obstacle_base();

  Rng clear_rng(5);
  ObstacleRoadSpec clear = s;
  clear.lambda = 0.0;
  RoadSimResult free_run = simulate_obstacle_road(clear, 100.0, clear_rng);
  CHECK(free_run.total_time == 100.0);
  CHECK(free_run.encounter_x.empty());

  Rng rng(424242);
  const double x_max = 20000.0;
  RoadSimResult out = simulate_obstacle_road(s, x_max, rng);
  CHECK(std::abs(out.mean_speed - 2.0 / 3.0) < 0.02 * (2.0 / 3.0));
  CHECK(out.encounter_x.size() == out.delays.size());
  CHECK(out.encounter_x.size() > 8000);

  // idle time equals the logged delays, no residue
  double idle = 0.0;
  for (double d : out.delays) idle += d;
  CHECK(out.total_time == x_max / s.v + idle);

  // encounters form a rate-b stream along the road
  std::vector<double> gaps;
  double prevx = 0.0;
  for (double x : out.encounter_x) {
    gaps.push_back(x - prevx);
    prevx = x;
  }
  double b = encounter_rate(s);
  CHECK(b == doctest::Approx(0.5).epsilon(1e-12));
  KsResult ks_gap =
      ks_test(gaps, [&](double t) { return 1.0 - std::exp(-b * t); });
  CHECK(ks_gap.p_value >= 0.01);

  // each delay is a stationary residual lifetime
  KsResult ks_delay =
      ks_test(out.delays, [&](double t) { return 1.0 - std::exp(-t); });
  CHECK(ks_delay.p_value >= 0.01);

  // bounded lifetimes, exact lookback path
  ObstacleRoadSpec uni = s;
  uni.lambda = 0.4;
  uni.Q = DistributionSpec::make_uniform(0.5, 1.5);
  Rng rng_u(31337);
  RoadSimResult out_u = simulate_obstacle_road(uni, x_max, rng_u);
  double want_u = mean_speed_obstacles(uni);
  CHECK(std::abs(out_u.mean_speed - want_u) < 0.02 * want_u);
  KsResult ks_udelay = ks_test(
      out_u.delays, [&](double t) { return equilibrium_cdf(uni.Q, t); });
  CHECK(ks_udelay.p_value >= 0.01);

  // bypass allowed: delays shrink to min(exp bypass, residual)
  ObstacleRoadSpec byp = s;
  byp.F = DistributionSpec::make_exponential(1.0);
  Rng rng_b(5150);
  RoadSimResult out_b = simulate_obstacle_road(byp, x_max, rng_b);
  CHECK(std::abs(out_b.mean_speed - 0.8) < 0.02 * 0.8);

  Rng ra(616), rb(616);
  RoadSimResult da = simulate_obstacle_road(s, 2000.0, ra);
  RoadSimResult db = simulate_obstacle_road(s, 2000.0, rb);
  CHECK(da.total_time == db.total_time);
  CHECK(da.encounter_x == db.encounter_x);
}

TEST_CASE("slow car closed form") {
  SlowCarRoadSpec s = slow_base();
  CHECK(slow_car_interaction_rate(s) == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(std::abs(slow_car_delay_mean(s) - 0.5) < 1e-10);
  CHECK(std::abs(mean_speed_slow_cars(s) - 21.0 / 11.0) < 1e-12);

  SlowCarRoadSpec none = s;
  none.lambda = 0.0;
  CHECK(mean_speed_slow_cars(none) == 2.0);
  SlowCarRoadSpec same = s;
  same.v1 = same.v2 = 1.0;
  CHECK(mean_speed_slow_cars(same) == 1.0);
  SlowCarRoadSpec instant = s;
  instant.F = DistributionSpec::make_deterministic(0.0);
  CHECK(mean_speed_slow_cars(instant) == doctest::Approx(2.0).epsilon(1e-12));

  SlowCarRoadSpec uni = s;
  uni.lambda = 0.3;
  uni.G = DistributionSpec::make_uniform(0.5, 2.5);
  uni.F = DistributionSpec::make_deterministic(0.7);
  uni.v1 = 3.0;
  uni.v2 = 0.8;
  CHECK(std::abs(mean_speed_slow_cars(uni) - 2.0906491697660883) < 1e-9);

  SlowCarRoadSpec det = s;
  det.lambda = 0.05;
  det.G = DistributionSpec::make_deterministic(2.0);
  det.F = DistributionSpec::make_deterministic(
      std::numeric_limits<double>::infinity());
  det.v1 = 1.5;
  det.v2 = 0.6;
  CHECK(std::abs(mean_speed_slow_cars(det) - 1.32) < 1e-12);
}

TEST_CASE("comoving frame identity") {
  std::vector<SlowCarRoadSpec> specs;
  specs.push_back(slow_base());
  {
    SlowCarRoadSpec s;
    s.lambda = 0.3;
    s.G = DistributionSpec::make_uniform(0.5, 2.5);
    s.F = DistributionSpec::make_deterministic(0.7);
    s.v1 = 3.0;
    s.v2 = 0.8;
    specs.push_back(s);
  }
  {
    SlowCarRoadSpec s;
    s.lambda = 0.05;
    s.G = DistributionSpec::make_deterministic(2.0);
    s.F = DistributionSpec::make_deterministic(
        std::numeric_limits<double>::infinity());
    s.v1 = 1.5;
    s.v2 = 0.6;
    specs.push_back(s);
  }
  for (const SlowCarRoadSpec& s : specs) {
    ObstacleRoadSpec mapped;
    mapped.lambda = s.lambda;
    mapped.Q = s.G.scaled(1.0 / s.v2);
    mapped.F = s.F;
    mapped.v = s.v1 - s.v2;
    double lhs = mean_speed_slow_cars(s);
    double rhs = s.v2 + mean_speed_obstacles(mapped);
    CHECK(std::abs(lhs - rhs) < 1e-10);
  }
}

TEST_CASE("slow car simulation") {
  SlowCarRoadSpec s = slow_base();

  Rng clear_rng(3);
  SlowCarRoadSpec none = s;
  none.lambda = 0.0;
  RoadSimResult free_run = simulate_slow_car_road(none, 100.0, clear_rng);
  CHECK(free_run.total_time == doctest::Approx(50.0).epsilon(1e-15));

  Rng rng(246810);
  const double x_max = 20000.0;
  RoadSimResult out = simulate_slow_car_road(s, x_max, rng);
  double want = 21.0 / 11.0;
  CHECK(std::abs(out.mean_speed - want) < 0.03 * want);
  CHECK(!out.encounter_x.empty());

  // reconstruction: covered distance splits into free motion and following
  double idle = 0.0;
  for (double d : out.delays) idle += d;
  double rebuilt = (s.v1 - s.v2) * (out.total_time - idle) +
                   s.v2 * out.total_time;
  CHECK(std::abs(rebuilt - x_max) < 1e-7 * x_max);

  // no overtaking, short fixed routes: pinned between the two speeds
  SlowCarRoadSpec follow = s;
  follow.lambda = 0.1;
  follow.G = DistributionSpec::make_deterministic(2.0);
  follow.F = DistributionSpec::make_deterministic(
      std::numeric_limits<double>::infinity());
  Rng rng_f(111);
  RoadSimResult out_f = simulate_slow_car_road(follow, x_max, rng_f);
  CHECK(out_f.mean_speed > follow.v2);
  CHECK(out_f.mean_speed < follow.v1);
  double want_f = mean_speed_slow_cars(follow);
  CHECK(std::abs(out_f.mean_speed - want_f) < 0.03 * want_f);

  Rng ra(999), rb(999);
  RoadSimResult da = simulate_slow_car_road(s, 2000.0, ra);
  RoadSimResult db = simulate_slow_car_road(s, 2000.0, rb);
  CHECK(da.total_time == db.total_time);
  CHECK(da.encounter_x == db.encounter_x);

  SlowCarRoadSpec stuck = s;
  stuck.v1 = stuck.v2;
  Rng rng_s(4);
  CHECK_THROWS_AS(simulate_slow_car_road(stuck, 100.0, rng_s),
                  std::invalid_argument);
}

TEST_CASE("road spec validation") {
  ObstacleRoadSpec s = obstacle_base();
  s.Q = DistributionSpec::make_deterministic(
      std::numeric_limits<double>::infinity());
  CHECK_THROWS_AS(validate(s), std::invalid_argument);
  ObstacleRoadSpec z = obstacle_base();
  z.Q = DistributionSpec::make_deterministic(0.0);
  CHECK_THROWS_AS(validate(z), std::invalid_argument);
  ObstacleRoadSpec nv = obstacle_base();
  nv.v = 0.0;
  CHECK_THROWS_AS(validate(nv), std::invalid_argument);
  ObstacleRoadSpec nl = obstacle_base();
  nl.lambda = -1.0;
  CHECK_THROWS_AS(validate(nl), std::invalid_argument);

  SlowCarRoadSpec sc = slow_base();
  sc.v2 = 0.0;
  CHECK_THROWS_AS(validate(sc), std::invalid_argument);
  SlowCarRoadSpec swap = slow_base();
  swap.v1 = 0.5;
  CHECK_THROWS_AS(validate(swap), std::invalid_argument);
}
