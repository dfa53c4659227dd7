#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace traffic {

// One polynomial segment of a density on [lo, hi] subset of [0, 1].
// coeffs are ascending powers of r.
struct DensityPiece {
  std::vector<double> coeffs;
  double lo = 0.0;
  double hi = 0.0;

  double eval(double r) const;
  double mass() const;
};

// Load-limit measure on [0, 1]: point masses plus a piecewise-polynomial
// density. Total mass must be 1.
struct LimitMeasure {
  std::vector<std::pair<double, double>> atoms;  // (value, mass)
  std::vector<DensityPiece> pieces;

  double total_mass() const;

  static LimitMeasure point(double r);
  static LimitMeasure two_point(double r1, double w1, double r2, double w2);
  static LimitMeasure uniform01();
};

// Throws std::invalid_argument on support outside [0,1], nonpositive atom
// masses, negative density (grid-checked), or total mass off 1 by > 1e-12.
void validate(const LimitMeasure& measure);

// Text form: one entry per line, "atom <r> <mass>" or
// "piece <lo> <hi> <c0> [c1 ...]". Blank lines and '#' comments ignored.
LimitMeasure parse_measure(std::istream& in);
LimitMeasure parse_measure_text(const std::string& text);
std::string format_measure(const LimitMeasure& measure);

// Empirical measure of a load vector: one atom per distinct value, mass
// (multiplicity)/N. Loads must lie in [0, 1].
LimitMeasure sample_measure(const std::vector<double>& loads);

// Finite-system load profile. loads are relative utilizations in [0, 1]
// with max exactly 1; M is the customer count. lambda records the target
// density M/N is tracking (informational; 0 means unspecified).
struct LoadProfile {
  std::vector<double> loads;
  std::size_t customers = 0;
  double lambda = 0.0;

  std::size_t size() const { return loads.size(); }
};

void validate(const LoadProfile& profile);

// h(z) = integral of r / (1 - z r) dI(r), finite and increasing on [0, 1).
// Throws std::domain_error for z outside [0, 1).
double h_of_z(const LimitMeasure& measure, double z);

// Critical density lim_{z->1-} z h(z). Returns +infinity when the measure
// puts an atom at 1 or its density is nonzero at 1.
double lambda_critical(const LimitMeasure& measure);

// Infinite-server variant: adding a service pool with per-customer rate
// alpha shifts the critical density to 1/alpha + lambda_critical(measure).
// alpha = +infinity recovers the plain network. Throws on alpha <= 0.
double lambda_critical_infinite_server(const LimitMeasure& measure,
                                       double alpha);

// Reparametrization used by the infinite-server analysis: q_i = r_i / p,
// w = z p, so the grand partition factors as exp(w/p) * prod 1/(1 - w q_i).
struct GrandPartitionFrame {
  double p = 1.0;
  std::vector<double> q;

  double w_of_z(double z) const { return z * p; }
  // log of exp(w/p) * prod (1 - w q_i)^-1; requires w q_i < 1 for all i.
  double log_grand_partition(double w) const;
};

GrandPartitionFrame infinite_server_frame(const std::vector<double>& loads,
                                          double p);

// Unique root of S'(z) = 0 in (0, 1), i.e. of
//   z * (1/N) sum r_i / (1 - z r_i) = M / N,
// located by bisection to 1e-13. Returns 0 when M = 0.
double saddle_point_finite(const LoadProfile& profile);

// Root of z h(z) = lambda in (0, 1), or 1 when lambda >= lambda_critical.
// Throws std::invalid_argument on lambda <= 0.
double z0_limit(const LimitMeasure& measure, double lambda);

struct SaddleReport {
  double z0 = 0.0;
  double s_at_z0 = 0.0;        // S(z0) = -(M/N) ln z0 - (1/N) sum ln(1 - z0 r_i)
  double s2_at_z0 = 0.0;       // S''(z0)
  double log_partition = 0.0;  // saddle estimate of ln Z_{N,M}
  bool subcritical = true;     // saddle well inside (0, 1)
  bool near_critical = false;  // z0 within 1e-6 of 1: estimate degrades
};

// Saddle-point estimate ln Z ~ N S(z0) - ln z0 - (1/2) ln(2 pi N S''(z0)).
SaddleReport partition_asymptotics(const LoadProfile& profile);

struct MarginalReport {
  double z0 = 0.0;
  std::vector<double> loads;   // requested relative loads
  std::vector<double> means;   // z0 r / (1 - z0 r) per load
};

// Limiting per-node geometry: a node with relative load r has geometric
// occupancy with parameter z0 r and mean z0 r / (1 - z0 r). Requires
// lambda < lambda_critical; throws std::domain_error otherwise.
MarginalReport limiting_marginals(const LimitMeasure& measure, double lambda,
                                  const std::vector<double>& loads);

struct JamReport {
  bool bounded = false;          // queue sizes stay tight
  double witness_bound = 0.0;    // sup over support of limiting means
  double z0 = 0.0;
  std::vector<std::size_t> jam_nodes;  // maximal-load node indices
  // Finite-system evidence: exact mean occupancy of a maximal-load node
  // for each customer count in the sweep.
  std::vector<std::size_t> sweep_customers;
  std::vector<double> sweep_means;
};

// Limit form: compares lambda against lambda_critical(measure).
JamReport classify_jams(const LimitMeasure& measure, double lambda);

// Finite form: regime read off the saddle position; attaches exact
// maximal-node means over the customer sweep (defaults to M, 2M, 4M, 8M).
JamReport classify_jams(const LoadProfile& profile,
                        const std::vector<std::size_t>& customer_sweep = {});

}  // namespace traffic
