#pragma once
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "trafficlab/rng.hpp"

namespace traffic {

// Service intensity of one node: mu(0) = 0, mu(n) > 0 for n > 0.
// Constant-rate shortcut unless a load-dependent function is given.
struct ServiceRate {
  double rate = 0.0;
  std::function<double(std::size_t)> fn;

  double operator()(std::size_t n) const {
    if (n == 0) return 0.0;
    return fn ? fn(n) : rate;
  }
  bool constant() const { return !fn; }
};

// Customer-migration network. All external rates zero and every routing row
// summing to 1 means the network is closed (fixed car count); otherwise some
// flow leaves (row sum < 1, remainder is the exit probability) or enters.
struct NetworkSpec {
  std::size_t nodes = 0;
  std::vector<std::vector<double>> P;
  std::vector<ServiceRate> service;
  std::vector<double> lambda_ext;
  std::string discipline = "fifo";  // recorded only; queue-length law ignores it

  bool closed() const;
  double exit_probability(std::size_t i) const;  // 1 - row sum
};

// Row sums, rate positivity, and reachability structure: closed networks need
// a strongly connected routing support; open ones need an exit reachable from
// every node (which drives the spectral radius below 1).
void validate(const NetworkSpec& spec);

// Text form: lines "N <count>", "edge <from> <to> <prob>", "mu <node> <rate>",
// "mu <node> table <v1> <v2> ...", "mu <node> infinite-server <nu>",
// "lambda <node> <rate>", "discipline <name>". Nodes are 1-based; 0 is outside.
NetworkSpec parse_network(std::istream& in);
NetworkSpec parse_network_text(const std::string& text);

struct TrafficSolution {
  std::vector<double> rho;
  std::vector<double> pi;  // probability normalization, closed case only
  bool closed_normalization = false;
};

// Left fixed vector of a stochastic irreducible P, scaled to max entry 1.
TrafficSolution solve_traffic_closed(const std::vector<std::vector<double>>& P);

// Solution of rho = lambda + rho P, verified against the Neumann series.
TrafficSolution solve_traffic_open(const std::vector<double>& lambda_ext,
                                   const std::vector<std::vector<double>>& P);

// Z_{N,M} = sum over occupation vectors of prod r_i^{n_i}, one-node-at-a-time
// convolution. partition_function may overflow to +inf for huge instances;
// the log form rescales internally and stays finite.
double partition_function(const std::vector<double>& r, std::size_t M);
double log_partition_function(const std::vector<double>& r, std::size_t M);

// General per-node factors f_i(n): Z_{N,M} = sum prod f_i(n_i).
double partition_function_general(const std::vector<std::function<double(std::size_t)>>& f,
                                  std::size_t nodes, std::size_t M);

// Exact mean occupancies of a closed constant-rate network with relative
// load factors r. Scale-free in r; uses the convolution tail identity
// E n_i = sum_k r_i^k Z_{N,M-k} / Z_{N,M}.
std::vector<double> closed_mean_occupancy(const std::vector<double>& r,
                                          std::size_t M);

struct ClosedStationary {
  std::vector<double> r;      // load factors rho_i / mu_i (constant-rate case)
  double log_Z = 0.0;
  std::vector<double> means;  // exact stationary mean queue lengths, sum = M
  // full law, only when the state space fits under enumeration_cap
  std::vector<std::vector<int>> states;
  std::vector<double> probs;
  bool enumerated = false;
};

// Product-form stationary law of the closed network with M cars. Means come
// from the tail identity P(n_i >= k) = r_i^k Z_{N,M-k} / Z_{N,M} for constant
// rates, and from per-node marginals against the complement convolution for
// load-dependent rates.
ClosedStationary stationary_closed(const NetworkSpec& spec, std::size_t M,
                                   std::size_t enumeration_cap = 20000);

struct OpenStationary {
  bool ergodic = false;
  std::vector<double> r;                      // utilizations rho_i / mu_i
  std::vector<std::size_t> transient_nodes;   // r_i >= 1; queues there grow linearly
  std::vector<double> means;                  // r/(1-r), ergodic case only
};

// Product-of-geometrics law for the ergodic open network (constant rates);
// otherwise the set of overloaded nodes. Load-dependent rates are rejected.
OpenStationary stationary_open(const NetworkSpec& spec);

struct CtmcResult {
  double total_time = 0.0;
  std::vector<double> occupation_mean;          // time-weighted mean queue length
  std::vector<std::vector<double>> occupancy;   // per node, time fraction at count n
  std::vector<std::vector<double>> jump_counts; // (nodes+1)^2; index 0 is outside
  std::vector<double> busy_time;                // time with n_i > 0
  std::vector<int> final_state;
  long events = 0;
};

// Called with every sojourn interval: state during the interval, its length.
using StateObserver = std::function<void(const std::vector<int>&, double)>;

// Exact-clock continuous-time simulation. Transition rates: service
// completions mu_i(n_i) split by the routing row (exits included), external
// arrivals at lambda_i. Self-routing completions count as events.
CtmcResult simulate_ctmc(const NetworkSpec& spec, std::vector<int> initial, double t_max,
                         Rng& rng, const StateObserver& observer = {});
// Closed-network convenience: M cars, spread round-robin over the nodes.
CtmcResult simulate_ctmc(const NetworkSpec& spec, std::size_t M, double t_max, Rng& rng,
                         const StateObserver& observer = {});

struct EstimatedParams {
  std::vector<std::vector<double>> P_hat;  // rows over destinations 0..nodes
  std::vector<double> mu_hat;              // (1/T) sum_j N_ij, valid when node i saturated
  std::vector<double> mu_hat_busy;         // extension: normalized by busy time instead
  std::vector<bool> identifiable;          // false when row i saw no departures
};

// Plug-in estimators from observed jump counts. P_hat rows with zero
// departures are flagged, never guessed.
EstimatedParams estimate_parameters(const std::vector<std::vector<double>>& jump_counts,
                                    double T, const std::vector<double>* busy_time = nullptr);

}  // namespace traffic
