#pragma once
#include <cstddef>
#include <vector>

#include "trafficlab/distribution.hpp"
#include "trafficlab/rng.hpp"

namespace traffic {

// Two-speed road: fast cars (density lambda1) overtake slow cars (density
// lambda2) one at a time; overtaking is an exponential(mu) service. All
// stationary claims need r = lambda1*(v1-v2)/mu < 1.
struct TandemSpec {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double mu = 1.0;
  double v1 = 1.0;
  double v2 = 0.0;
};

void validate(const TandemSpec& spec);

// r = lambda1*(v1-v2)/mu
double tandem_utilization(const TandemSpec& spec);

// Mean time a fast car spends clearing one slow car, 1/(mu - lambda1*v).
double mean_overtake_time(const TandemSpec& spec);

// Long-run mean speed of a fast car in the original frame. The relative
// frame (slow cars at rest) gives 1/(lambda2/(mu-lambda1*v) + 1/v); the
// original-frame answer adds v2 back. Throws on r >= 1.
double tandem_mean_speed(const TandemSpec& spec);

struct QueueLaw {
  double r = 0.0;                  // utilization
  double mean_overtake_time = 0.0; // expected sojourn behind one slow car
  std::vector<double> pmf;         // P(n) = (1-r) r^n, truncated; tail < 1e-12
};

// Geometric law of the queue length behind one slow car.
QueueLaw mm1_queue_distribution(const TandemSpec& spec);

struct TandemSimResult {
  double total_time = 0.0;
  double mean_speed = 0.0;
  std::size_t stations = 0;  // slow cars reached before x_max
};

// Discrete-event tandem run: slow cars sit at Poisson(lambda2) positions,
// each holds an independent queue with arrival rate lambda1*v and service
// rate mu, warmed up from empty before the tagged car joins.
TandemSimResult simulate_tandem(const TandemSpec& spec, double x_max, Rng& rng);

// Time-weighted occupancy fractions of a single queue after `events`
// transitions from an empty start. Index n holds the fraction of time with
// n customers present.
std::vector<double> mm1_occupancy_sim(double arrival_rate, double service_rate,
                                      std::size_t events, Rng& rng);

// Residual lifetime seen by a uniformly random inspection of a stationary
// renewal stream with holding law Q: density (1-Q(t))/m, mean m2/(2m).
struct ResidualLife {
  DistributionSpec lifetime;
  double mean = 0.0;

  double density(double t) const;
  double cdf(double t) const;
  double sample(Rng& rng) const;
};

ResidualLife residual_life_density(const DistributionSpec& Q);

// a = E min(eta, zeta): eta ~ F (bypass time, may be never), zeta the
// residual life of Q. Quadrature of (1-F)(1-H) with exact shortcuts for
// the degenerate F cases.
double obstacle_delay_mean(const DistributionSpec& Q, const DistributionSpec& F);

// Obstacles appear on the line as a space-time Poisson field of intensity
// lambda (per length*time), each blocking its birth point for a Q lifetime.
// A car crossing a live obstacle waits min(bypass ~ F, remaining lifetime);
// F = never means wait-until-cleared.
struct ObstacleRoadSpec {
  double lambda = 0.0;
  DistributionSpec Q;
  DistributionSpec F;
  double v = 1.0;
};

void validate(const ObstacleRoadSpec& spec);

// b = lambda * mean(Q): rate of live obstacles met per unit length.
double encounter_rate(const ObstacleRoadSpec& spec);

// Long-run mean speed v/(1+abv).
double mean_speed_obstacles(const ObstacleRoadSpec& spec);

struct RoadSimResult {
  double total_time = 0.0;
  double mean_speed = 0.0;
  std::vector<double> encounter_x;  // position of each encounter
  std::vector<double> delays;       // elapsed delay of each encounter
};

// One car from (0,0) at speed v through the live obstacle field; logs each
// encounter. Total time satisfies T = x_max/v + sum(delays) exactly.
RoadSimResult simulate_obstacle_road(const ObstacleRoadSpec& spec, double x_max,
                                     Rng& rng);

// Slow cars enter at space-time Poisson(lambda) points, drive at v2 for a
// route length ~ G, then leave. A fast car (speed v1) reaching a slow car
// follows it until its own overtaking clock ~ F fires or the slow car
// exits, whichever is first.
struct SlowCarRoadSpec {
  double lambda = 0.0;
  DistributionSpec G;
  DistributionSpec F;
  double v1 = 2.0;
  double v2 = 1.0;
};

void validate(const SlowCarRoadSpec& spec);

// d = lambda * mean(G) * (1/v2 - 1/v1): rate of slow cars met per length.
double slow_car_interaction_rate(const SlowCarRoadSpec& spec);

// c = E min(v2*tau, beta): tau ~ F, beta the residual route length of G.
// Computed in the length domain.
double slow_car_delay_mean(const SlowCarRoadSpec& spec);

// Long-run mean speed (1+dc)/(1+dc*v1/v2) * v1. Equals
// v2 + mean_speed_obstacles of the comoving-frame spec (v = v1-v2,
// Q = G scaled by 1/v2, same lambda and F).
double mean_speed_slow_cars(const SlowCarRoadSpec& spec);

// Direct run in the comoving frame of the slow cars; positions reported in
// the original frame. encounter_x holds where the fast car caught each
// group; delays are elapsed following times (final one truncated at x_max).
RoadSimResult simulate_slow_car_road(const SlowCarRoadSpec& spec, double x_max,
                                     Rng& rng);

}  // namespace traffic
