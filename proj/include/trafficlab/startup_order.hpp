#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "trafficlab/rng.hpp"

namespace traffic {

// Start-up dynamics of a stopped column of cars, and a marked flow where
// driver moods switch between two speeds and faster cars may overtake.

enum class StartupModel { A, B };

struct StartupSpec {
  StartupModel model = StartupModel::A;
  double rho = 0.5;          // initial spatial density
  double v = 1.0;            // cruising speed, model B only
  double d_eff = 1.0;        // blocking distance, model B only
  std::size_t n_cars = 100;  // population, model B only
};

void validate(const StartupSpec& spec);

// Model A: cars at random points, all standing. Each sets off after a
// unit-mean exponential delay, drives at speed 1, and on reaching a standing
// car waits there; the wait ends an exponential time after the car ahead has
// left. Order is preserved, speeds are only 0 or 1.
struct StartupCar {
  double initial_position = 0.0;
  std::vector<double> starts;  // times the car set off
  std::vector<double> stops;   // times the car halted; interleaves starts
  bool finalized = false;      // known to never stop after starts.back()
};

struct StartupAResult {
  std::vector<StartupCar> cars;  // front car first
  // Settled spacing behind each finalized predecessor: once both cars of a
  // pair move for good their spacing never changes, and that value is
  // recorded here (entry i-1 is the spacing between cars i-1 and i).
  std::vector<double> gaps;
  bool completed = false;  // every car finalized within the horizon
};

// Cars drawn as a density-rho Poisson sample on [0, window), moving in +x.
StartupAResult simulate_startup_A(const StartupSpec& spec, double window,
                                  double t_max, Rng& rng);
// Same dynamics from explicit positions, strictly decreasing front to back.
StartupAResult simulate_startup_A(const StartupSpec& spec,
                                  std::vector<double> initial_positions,
                                  double t_max, Rng& rng);

// Model B: lead car at the front of a column on the left half-axis. A car
// drives at speed v exactly when the gap to the car ahead is at least d_eff,
// otherwise it stands. At a gap of exactly d_eff the car copies the state of
// the car ahead; any faster choice would cross below the threshold.
struct StartupBRecord {
  double first_move = 0.0;     // first time the car drives
  double final_move = 0.0;     // last recorded setting-off time
  double lead_distance = 0.0;  // distance to the lead car, frozen from final_move on
  int stops = 0;
  bool finalized = false;  // final_move is known to be the last one
};

struct StartupBResult {
  std::vector<StartupBRecord> records;  // index 0 is the lead car
  bool completed = false;
};

// Gaps drawn i.i.d. exponential(rho); spec.n_cars cars including the lead.
StartupBResult simulate_startup_B(const StartupSpec& spec, double t_max, Rng& rng);
// Deterministic dynamics from explicit positions, front car first.
StartupBResult simulate_startup_B(const StartupSpec& spec,
                                  std::vector<double> initial_positions,
                                  double t_max);

// Marked flow: car i carries a two-state Markov driver speed w_i switching
// between v_a and v_b. A free car drives at w_i. A car that reaches the car
// ahead sticks to it and copies its velocity while w_i stays at or above it;
// the pair parts the moment w_i drops below the leader's velocity. While
// stuck with w_i strictly above the leader's velocity, an exponential clock
// of rate lambda swaps the two cars in place (overtaking). lambda may be 0
// (no overtaking) or infinity (swap immediately on contact).
struct VelocityFlowSpec {
  std::size_t n_cars = 0;
  double v_a = 1.0;  // slow driver speed
  double v_b = 2.0;  // fast driver speed
  double q_ab = 1.0;  // switch rate slow -> fast
  double q_ba = 1.0;  // switch rate fast -> slow
  double c1 = 0.5;   // global lower speed bound, c1 < v_a
  double c2 = 3.0;   // global upper speed bound, v_b < c2
  double lambda_overtake = 0.0;
  double rho0 = 1.0;  // initial gap density
};

void validate(const VelocityFlowSpec& spec);

struct VelocitySnapshot {
  double t = 0.0;
  std::vector<std::size_t> order;  // car ids front to back
  std::vector<double> position;    // by car id
  std::vector<double> velocity;    // by car id
  std::vector<double> driver;      // w by car id
  std::vector<std::uint8_t> contact;  // by rank: car touches the one ahead
};

struct VelocityFlowTrace {
  std::vector<VelocitySnapshot> snapshots;
  std::size_t catches = 0;
  std::size_t overtakes = 0;
  std::size_t switches = 0;
};

// Initial gaps i.i.d. exponential(rho0), driver states drawn stationary.
VelocityFlowTrace simulate_velocity_flow(const VelocityFlowSpec& spec, double t_max,
                                         const std::vector<double>& snapshot_times,
                                         Rng& rng);
// Same dynamics from explicit initial gaps (front to back, all positive) and
// driver states (nonzero marks the fast state).
VelocityFlowTrace simulate_velocity_flow(const VelocityFlowSpec& spec,
                                         std::vector<double> initial_gaps,
                                         std::vector<std::uint8_t> initial_fast,
                                         double t_max,
                                         const std::vector<double>& snapshot_times,
                                         Rng& rng);

struct CovarianceEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

// Across-replica covariance of the velocities of cars i and j at snapshot
// time t, with a delete-one jackknife standard error. i == j gives the
// variance of car i's velocity.
CovarianceEstimate covariance_estimate(const std::vector<VelocityFlowTrace>& traces,
                                       std::size_t i, std::size_t j, double t);

struct PhaseSweepRow {
  double lambda = 0.0;
  double mean_nn_covariance = 0.0;  // adjacent-rank covariance, averaged over pairs
  double nn_covariance_se = 0.0;    // rough pooled scale for the mean
  double mean_cluster_size = 0.0;   // maximal runs of touching cars
  bool defined = false;             // needs at least 2 cars and 2 replicas
};

std::vector<PhaseSweepRow> phase_sweep(const VelocityFlowSpec& base,
                                       const std::vector<double>& lambda_grid,
                                       double t_max, std::size_t replicas, Rng& rng);

}  // namespace traffic
