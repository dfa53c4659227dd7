#include "trafficlab/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>

#include "json.hpp"
#include "trafficlab/capacity_jam.hpp"
#include "trafficlab/critical_load.hpp"
#include "trafficlab/distribution.hpp"
#include "trafficlab/grammar_flow.hpp"
#include "trafficlab/linear_road.hpp"
#include "trafficlab/pointfield.hpp"
#include "trafficlab/qnet.hpp"
#include "trafficlab/rng.hpp"
#include "trafficlab/startup_order.hpp"
#include "trafficlab/stats.hpp"

namespace traffic {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

[[noreturn]] void fail(const std::string& msg) { throw std::invalid_argument(msg); }

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::string fmt_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_number(const std::string& field, const std::string& raw) {
  try {
    std::size_t used = 0;
    double v = std::stod(raw, &used);
    if (trim(raw.substr(used)).empty()) return v;
  } catch (const std::exception&) {
  }
  fail(field + ": expected a number, got '" + raw + "'");
}

std::size_t parse_count(const std::string& field, const std::string& raw) {
  try {
    std::size_t used = 0;
    long long v = std::stoll(raw, &used);
    if (trim(raw.substr(used)).empty() && v >= 0) return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
  }
  fail(field + ": expected a nonnegative integer, got '" + raw + "'");
}

// Typed access to the flat key-value block of one experiment. The allowed
// key set is declared up front so a stray key is named immediately.
class Params {
 public:
  Params(const std::string& experiment, const std::map<std::string, std::string>& kv,
         const std::vector<const char*>& allowed)
      : exp_(experiment), kv_(kv) {
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, value] : kv)
      if (!ok.count(key)) fail(exp_ + ": unknown key '" + key + "'");
  }

  bool has(const std::string& key) const { return kv_.count(key) != 0; }

  std::string text(const std::string& key) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) fail(field(key) + ": required key missing");
    return it->second;
  }
  std::string text_or(const std::string& key, const std::string& fallback) const {
    auto it = kv_.find(key);
    return it == kv_.end() ? fallback : it->second;
  }

  double number(const std::string& key) const { return parse_number(field(key), text(key)); }
  double number_or(const std::string& key, double fallback) const {
    return has(key) ? number(key) : fallback;
  }
  double positive(const std::string& key) const {
    double v = number(key);
    if (!(v > 0.0) || std::isnan(v)) fail(field(key) + ": must be positive");
    return v;
  }
  double positive_or(const std::string& key, double fallback) const {
    return has(key) ? positive(key) : fallback;
  }
  double nonneg_or(const std::string& key, double fallback) const {
    if (!has(key)) return fallback;
    double v = number(key);
    if (!(v >= 0.0)) fail(field(key) + ": must be nonnegative");
    return v;
  }

  std::size_t count(const std::string& key) const { return parse_count(field(key), text(key)); }
  std::size_t count_or(const std::string& key, std::size_t fallback) const {
    return has(key) ? count(key) : fallback;
  }

  DistributionSpec dist(const std::string& key) const {
    try {
      DistributionSpec d = DistributionSpec::parse(text(key));
      validate(d);
      return d;
    } catch (const std::invalid_argument& e) {
      fail(field(key) + ": " + e.what());
    }
  }
  DistributionSpec dist_or(const std::string& key, const char* fallback) const {
    if (has(key)) return dist(key);
    return DistributionSpec::parse(fallback);
  }

  std::vector<double> number_list(const std::string& key) const {
    std::vector<double> out;
    std::string raw = text(key);
    std::size_t start = 0;
    while (start <= raw.size()) {
      std::size_t comma = raw.find(',', start);
      std::string piece = trim(raw.substr(start, comma - start));
      if (piece.empty()) fail(field(key) + ": empty entry in list");
      out.push_back(parse_number(field(key), piece));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    return out;
  }

  std::string field(const std::string& key) const { return exp_ + "." + key; }
  const std::string& experiment() const { return exp_; }

 private:
  std::string exp_;
  const std::map<std::string, std::string>& kv_;
};

// One metric column being filled replica by replica.
struct MetricCol {
  std::string name;
  double analytic = kNan;
  double rel_tol = kNan;
  double abs_tol = kNan;
  std::vector<double> values;
};

MetricCol col(std::string name, double analytic = kNan, double rel_tol = kNan,
              double abs_tol = kNan) {
  MetricCol c;
  c.name = std::move(name);
  c.analytic = analytic;
  c.rel_tol = rel_tol;
  c.abs_tol = abs_tol;
  return c;
}

MetricAggregate aggregate(const MetricCol& c) {
  MetricAggregate m;
  m.name = c.name;
  m.values = c.values;
  m.analytic = c.analytic;
  m.rel_tolerance = c.rel_tol;
  m.abs_tolerance = c.abs_tol;
  bool all_equal = true;
  for (double v : c.values)
    if (std::memcmp(&v, &c.values.front(), sizeof v) != 0) all_equal = false;
  if (all_equal) {
    m.mean = c.values.front();
    m.std_error = 0.0;
  } else {
    RunningStat st;
    for (double v : c.values) st.add(v);
    m.mean = st.mean;
    m.std_error = st.stderr_mean();
  }
  m.checked = std::isfinite(c.analytic) &&
              (std::isfinite(c.rel_tol) || std::isfinite(c.abs_tol));
  if (m.checked) {
    double slack = 3.0 * m.std_error;
    if (std::isfinite(c.rel_tol)) slack = std::max(slack, c.rel_tol * std::abs(c.analytic));
    if (std::isfinite(c.abs_tol)) slack = std::max(slack, c.abs_tol);
    m.pass = std::abs(m.mean - c.analytic) <= slack;
  }
  return m;
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return kNan;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

using Cols = std::vector<MetricCol>;
using Runner = std::function<Cols(const Params&, std::uint64_t, std::size_t)>;

// ---------------------------------------------------------------- pointfield

Cols run_pointfield(const Params& p, std::uint64_t seed, std::size_t replicas) {
  const double window = p.positive("window");
  const bool renewal = p.has("gap");
  if (!renewal && !p.has("rate")) fail("pointfield: needs 'rate' or 'gap'");
  DistributionSpec gap;
  double density_ref = 0.0;
  if (renewal) {
    gap = p.dist("gap");
    require_positive_gap(gap, p.field("gap"));
    density_ref = 1.0 / gap.mean();
    if (p.has("rate")) {
      const double rate = p.positive("rate");
      if (std::abs(rate - density_ref) > 1e-9 * std::max(1.0, rate))
        fail("pointfield.rate: inconsistent with the mean of 'gap'");
    }
  } else {
    density_ref = p.positive("rate");
  }
  const double delay_ref = renewal ? equilibrium_mean(gap) : 1.0 / density_ref;

  // count noise over one window is large; the sharp law checks live in the
  // field statistics, not in this smoke-level density figure
  Cols cols = {col("points"), col("density", density_ref, 0.25),
               col("first_delay", delay_ref)};
  for (std::size_t r = 0; r < replicas; ++r) {
    Rng rng(derive_seed(seed, r));
    const Interval win{0.0, window};
    PointConfiguration c = renewal ? sample_stationary_renewal(gap, win, rng)
                                   : sample_poisson(density_ref, win, rng);
    cols[0].values.push_back(static_cast<double>(c.size()));
    cols[1].values.push_back(static_cast<double>(c.size()) / window);
    cols[2].values.push_back(c.positions.empty() ? window : c.positions.front());
  }
  return cols;
}

// ------------------------------------------------------------------- grammar

Cols run_grammar(const Params& p, std::uint64_t seed, std::size_t replicas) {
  GrammarState initial;
  initial.word = p.text("word");
  initial.r = static_cast<long long>(p.number_or("r", 0.0));
  try {
    validate(initial);
  } catch (const std::invalid_argument& e) {
    fail(p.field("word") + ": " + e.what());
  }
  GrammarSpec spec;
  spec.lambda0_plus = p.nonneg_or("l0", 0.0);
  spec.lambda1_plus = p.nonneg_or("l1", 0.0);
  spec.lambda2_plus = p.nonneg_or("l2plus", 0.0);
  spec.lambda2_minus = p.nonneg_or("l2minus", 0.0);
  spec.v = p.nonneg_or("v", 0.0);
  const double t_max = p.positive("t_max");

  const auto counts0 = symbol_counts(initial.word);
  const double cars0 = static_cast<double>(counts0[1] + counts0[2]);

  Cols cols = {col("events"), col("cars_final", cars0, kNan, 0.0),
               col("displacement"), col("absorbed")};
  for (std::size_t r = 0; r < replicas; ++r) {
    Rng rng(derive_seed(seed, r));
    GrammarTrace trace = simulate(initial, spec, t_max, {}, rng);
    const auto counts = symbol_counts(trace.final_state.word);
    cols[0].values.push_back(static_cast<double>(trace.events.size()));
    cols[1].values.push_back(static_cast<double>(counts[1] + counts[2]));
    cols[2].values.push_back(static_cast<double>(trace.final_state.r - initial.r));
    cols[3].values.push_back(trace.absorbed ? 1.0 : 0.0);
  }
  return cols;
}

// ----------------------------------------------------------------------- jam

Cols run_jam(const Params& p, std::uint64_t seed, std::size_t replicas) {
  CarGeometry geom;
  geom.d = p.positive("d");
  geom.d0_plus = p.positive("d0plus");
  geom.lanes = static_cast<int>(p.count_or("lanes", 1));
  if (p.has("dplus")) {
    if (p.has("headway_speeds") || p.has("headway_gaps"))
      fail("jam.dplus: give either 'dplus' or the headway table, not both");
    geom.headway = headway_from_table({0.0}, {p.positive("dplus")});
  } else if (p.has("headway_speeds") && p.has("headway_gaps")) {
    geom.headway = headway_from_table(p.number_list("headway_speeds"),
                                      p.number_list("headway_gaps"));
  } else {
    fail("jam: needs 'dplus' or both 'headway_speeds' and 'headway_gaps'");
  }
  try {
    validate(geom);
  } catch (const std::invalid_argument& e) {
    fail(std::string("jam: ") + e.what());
  }
  const double v = p.positive("v");
  const double t_max = p.positive_or("t_max", 1e4);
  DistributionSpec moving_gap;
  const bool random_gap = p.has("moving_gap");
  if (random_gap) moving_gap = p.dist("moving_gap");

  double rate_ref = kNan;
  if (!random_gap) rate_ref = jam_growth_rate(geom, v);

  Cols cols = {col("growth_rate", rate_ref, 0.02), col("stops")};
  for (std::size_t r = 0; r < replicas; ++r) {
    Rng rng(derive_seed(seed, r));
    JamTrace trace = simulate_jam(geom, v, t_max, rng, random_gap ? &moving_gap : nullptr);
    cols[0].values.push_back(trace.value_at(t_max) / t_max);
    cols[1].values.push_back(static_cast<double>(trace.times.size()));
  }
  return cols;
}

// ------------------------------------------------------------------- startup

Cols run_startup(const Params& p, std::uint64_t seed, std::size_t replicas) {
  const std::string model = p.text_or("model", "A");
  StartupSpec spec;
  spec.rho = p.positive("rho");
  if (model == "A") {
    spec.model = StartupModel::A;
    if (!(spec.rho < 1.0)) fail("startup.rho: the release model needs rho < 1");
    const double window = p.positive_or("window", 2000.0);
    const double t_max = p.positive_or("t_max", 500.0);
    for (const char* k : {"v", "d_eff", "n_cars"})
      if (p.has(k)) fail(p.field(k) + ": not a release-model key");

    Cols cols = {col("cars"), col("mean_gap", 1.0 / spec.rho, 0.1), col("ks_p"),
                 col("mean_stops"), col("completed")};
    for (std::size_t r = 0; r < replicas; ++r) {
      Rng rng(derive_seed(seed, r));
      StartupAResult res = simulate_startup_A(spec, window, t_max, rng);
      RunningStat stops;
      for (const auto& car : res.cars) stops.add(static_cast<double>(car.stops.size()));
      double ks_p = 0.0;
      if (res.gaps.size() >= 2) {
        const double rho = spec.rho;
        ks_p = ks_test(res.gaps, [rho](double g) { return 1.0 - std::exp(-rho * g); })
                   .p_value;
      }
      cols[0].values.push_back(static_cast<double>(res.cars.size()));
      cols[1].values.push_back(mean_of(res.gaps));
      cols[2].values.push_back(ks_p);
      cols[3].values.push_back(res.cars.empty() ? 0.0 : stops.mean);
      cols[4].values.push_back(res.completed ? 1.0 : 0.0);
    }
    return cols;
  }
  if (model != "B") fail("startup.model: must be 'A' or 'B'");
  spec.model = StartupModel::B;
  spec.v = p.positive_or("v", 1.0);
  spec.d_eff = p.positive_or("d_eff", 1.0);
  spec.n_cars = p.count_or("n_cars", 100);
  if (spec.n_cars < 1) fail("startup.n_cars: needs at least one car");
  if (p.has("window")) fail("startup.window: not a column-model key");
  const double t_max = p.positive_or("t_max", 1e6);

  Cols cols = {col("completion_time"), col("mean_first_move"), col("mean_stops"),
               col("completed")};
  for (std::size_t r = 0; r < replicas; ++r) {
    Rng rng(derive_seed(seed, r));
    StartupBResult res = simulate_startup_B(spec, t_max, rng);
    RunningStat first, stops;
    double completion = 0.0;
    for (const auto& rec : res.records) {
      first.add(rec.first_move);
      stops.add(static_cast<double>(rec.stops));
      completion = std::max(completion, rec.final_move);
    }
    cols[0].values.push_back(completion);
    cols[1].values.push_back(first.mean);
    cols[2].values.push_back(stops.mean);
    cols[3].values.push_back(res.completed ? 1.0 : 0.0);
  }
  return cols;
}

// -------------------------------------------------------------- velocity-order

Cols run_velocity_order(const Params& p, std::uint64_t seed, std::size_t replicas) {
  VelocityFlowSpec spec;
  spec.n_cars = p.count("n_cars");
  if (spec.n_cars < 1) fail("velocity-order.n_cars: needs at least one car");
  spec.v_a = p.positive_or("v_a", 1.0);
  spec.v_b = p.positive_or("v_b", 2.0);
  spec.q_ab = p.positive_or("q_ab", 1.0);
  spec.q_ba = p.positive_or("q_ba", 1.0);
  spec.c1 = p.positive_or("c1", 0.5);
  spec.c2 = p.positive_or("c2", 3.0);
  spec.rho0 = p.positive_or("rho0", 1.0);
  spec.lambda_overtake = p.number_or("lambda", 0.0);
  const double t_max = p.positive("t_max");
  try {
    validate(spec);
  } catch (const std::invalid_argument& e) {
    fail(std::string("velocity-order: ") + e.what());
  }

  // with instant overtaking nothing stays blocked, so the speed marginal is
  // the driver process itself and the mean has a closed form
  const double speed_ref =
      std::isinf(spec.lambda_overtake)
          ? (spec.q_ba * spec.v_a + spec.q_ab * spec.v_b) / (spec.q_ab + spec.q_ba)
          : kNan;

  Cols cols = {col("mean_speed", speed_ref, 0.05), col("catches"), col("overtakes"),
               col("switches"), col("mean_cluster")};
  for (std::size_t r = 0; r < replicas; ++r) {
    Rng rng(derive_seed(seed, r));
    VelocityFlowTrace trace = simulate_velocity_flow(spec, t_max, {t_max}, rng);
    const VelocitySnapshot& snap = trace.snapshots.back();
    double speed_sum = 0.0;
    std::size_t heads = 0;
    for (std::size_t rank = 0; rank < spec.n_cars; ++rank) {
      speed_sum += snap.velocity[snap.order[rank]];
      if (rank == 0 || !snap.contact[rank]) ++heads;
    }
    cols[0].values.push_back(speed_sum / static_cast<double>(spec.n_cars));
    cols[1].values.push_back(static_cast<double>(trace.catches));
    cols[2].values.push_back(static_cast<double>(trace.overtakes));
    cols[3].values.push_back(static_cast<double>(trace.switches));
    cols[4].values.push_back(static_cast<double>(spec.n_cars) /
                             static_cast<double>(heads));
  }
  return cols;
}

// --------------------------------------------------------------- road-tandem

Cols run_road_tandem(const Params& p, std::uint64_t seed, std::size_t replicas) {
  TandemSpec spec;
  spec.lambda1 = p.positive("lambda1");
  spec.lambda2 = p.positive("lambda2");
  spec.mu = p.positive_or("mu", 1.0);
  spec.v1 = p.positive_or("v1", 1.0);
  spec.v2 = p.nonneg_or("v2", 0.0);
  try {
    validate(spec);
  } catch (const std::invalid_argument& e) {
    fail(std::string("road-tandem: ") + e.what());
  }
  const double x_max = p.positive_or("x_max", 1e4);
  const double speed_ref = tandem_mean_speed(spec);

  Cols cols = {col("mean_speed", speed_ref, 0.02), col("stations")};
  for (std::size_t r = 0; r < replicas; ++r) {
    Rng rng(derive_seed(seed, r));
    TandemSimResult res = simulate_tandem(spec, x_max, rng);
    cols[0].values.push_back(res.mean_speed);
    cols[1].values.push_back(static_cast<double>(res.stations));
  }
  return cols;
}

// ------------------------------------------------------------ road-obstacles

Cols run_road_obstacles(const Params& p, std::uint64_t seed, std::size_t replicas) {
  ObstacleRoadSpec spec;
  spec.lambda = p.positive("lambda");
  spec.Q = p.dist("Q");
  spec.F = p.dist_or("F", "inf");
  spec.v = p.positive_or("v", 1.0);
  try {
    validate(spec);
  } catch (const std::invalid_argument& e) {
    fail(std::string("road-obstacles: ") + e.what());
  }
  const double x_max = p.positive_or("x_max", 1e5);
  const double speed_ref = mean_speed_obstacles(spec);
  const double b = encounter_rate(spec);
  const double delay_ref = obstacle_delay_mean(spec.Q, spec.F);

  Cols cols = {col("mean_speed", speed_ref, 0.01), col("encounters", b * x_max),
               col("mean_delay", delay_ref), col("total_time")};
  for (std::size_t r = 0; r < replicas; ++r) {
    Rng rng(derive_seed(seed, r));
    RoadSimResult res = simulate_obstacle_road(spec, x_max, rng);
    cols[0].values.push_back(res.mean_speed);
    cols[1].values.push_back(static_cast<double>(res.encounter_x.size()));
    cols[2].values.push_back(mean_of(res.delays));
    cols[3].values.push_back(res.total_time);
  }
  return cols;
}

// ------------------------------------------------------------- road-slowcars

Cols run_road_slowcars(const Params& p, std::uint64_t seed, std::size_t replicas) {
  SlowCarRoadSpec spec;
  spec.lambda = p.positive("lambda");
  spec.G = p.dist("G");
  spec.F = p.dist_or("F", "inf");
  spec.v1 = p.positive_or("v1", 2.0);
  spec.v2 = p.positive_or("v2", 1.0);
  try {
    validate(spec);
  } catch (const std::invalid_argument& e) {
    fail(std::string("road-slowcars: ") + e.what());
  }
  const double x_max = p.positive_or("x_max", 1e5);
  const double speed_ref = mean_speed_slow_cars(spec);
  const double d = slow_car_interaction_rate(spec);

  Cols cols = {col("mean_speed", speed_ref, 0.02), col("encounters", d * x_max),
               col("total_time")};
  for (std::size_t r = 0; r < replicas; ++r) {
    Rng rng(derive_seed(seed, r));
    RoadSimResult res = simulate_slow_car_road(spec, x_max, rng);
    cols[0].values.push_back(res.mean_speed);
    cols[1].values.push_back(static_cast<double>(res.encounter_x.size()));
    cols[2].values.push_back(res.total_time);
  }
  return cols;
}

// ---------------------------------------------------------------------- qnet

NetworkSpec load_network(const Params& p) {
  const bool inline_text = p.has("network");
  const bool from_file = p.has("network_file");
  if (inline_text == from_file)
    fail(p.experiment() + ": needs exactly one of 'network' and 'network_file'");
  std::string text;
  if (inline_text) {
    text = p.text("network");
    std::replace(text.begin(), text.end(), ';', '\n');
  } else {
    std::ifstream in(p.text("network_file"));
    if (!in) fail(p.field("network_file") + ": cannot read file");
    std::ostringstream buf;
    buf << in.rdbuf();
    text = buf.str();
  }
  try {
    NetworkSpec net = parse_network_text(text);
    validate(net);
    return net;
  } catch (const std::invalid_argument& e) {
    fail(p.experiment() + ".network: " + e.what());
  }
}

Cols run_qnet_closed(const Params& p, std::uint64_t seed, std::size_t replicas) {
  NetworkSpec net = load_network(p);
  if (!net.closed())
    fail("qnet-closed.network: must be closed (no external arrivals, full routing rows)");
  const std::size_t M = p.count("M");
  const double t_max = p.positive_or("t_max", 2000.0);

  ClosedStationary ref;
  try {
    ref = stationary_closed(net, M);
  } catch (const std::exception& e) {
    fail(std::string("qnet-closed: ") + e.what());
  }

  Cols cols;
  for (std::size_t i = 0; i < net.nodes; ++i)
    cols.push_back(col("mean_n" + std::to_string(i + 1), ref.means[i], 0.1));
  cols.push_back(col("events"));
  for (std::size_t r = 0; r < replicas; ++r) {
    Rng rng(derive_seed(seed, r));
    CtmcResult res = simulate_ctmc(net, M, t_max, rng);
    for (std::size_t i = 0; i < net.nodes; ++i)
      cols[i].values.push_back(res.occupation_mean[i]);
    cols[net.nodes].values.push_back(static_cast<double>(res.events));
  }
  return cols;
}

Cols run_qnet_open(const Params& p, std::uint64_t seed, std::size_t replicas) {
  NetworkSpec net = load_network(p);
  if (net.closed()) fail("qnet-open.network: must have external arrivals or exits");
  const double t_max = p.positive_or("t_max", 4000.0);

  OpenStationary ref;
  try {
    ref = stationary_open(net);
  } catch (const std::exception& e) {
    fail(std::string("qnet-open: ") + e.what());
  }

  Cols cols = {col("ergodic")};
  for (std::size_t i = 0; i < net.nodes; ++i) {
    const double mean_ref = ref.ergodic ? ref.means[i] : kNan;
    cols.push_back(col("mean_n" + std::to_string(i + 1), mean_ref,
                       ref.ergodic ? 0.1 : kNan));
  }
  cols.push_back(col("events"));
  for (std::size_t r = 0; r < replicas; ++r) {
    Rng rng(derive_seed(seed, r));
    CtmcResult res =
        simulate_ctmc(net, std::vector<int>(net.nodes, 0), t_max, rng);
    cols[0].values.push_back(ref.ergodic ? 1.0 : 0.0);
    for (std::size_t i = 0; i < net.nodes; ++i)
      cols[1 + i].values.push_back(res.occupation_mean[i]);
    cols[1 + net.nodes].values.push_back(static_cast<double>(res.events));
  }
  return cols;
}

// ------------------------------------------------------------- critical-load

Cols run_critical_load(const Params& p, std::uint64_t seed, std::size_t replicas) {
  (void)seed;
  const bool inline_text = p.has("measure");
  const bool from_file = p.has("measure_file");
  if (inline_text == from_file)
    fail("critical-load: needs exactly one of 'measure' and 'measure_file'");
  std::string text;
  if (inline_text) {
    text = p.text("measure");
    std::replace(text.begin(), text.end(), ';', '\n');
  } else {
    std::ifstream in(p.text("measure_file"));
    if (!in) fail(p.field("measure_file") + ": cannot read file");
    std::ostringstream buf;
    buf << in.rdbuf();
    text = buf.str();
  }
  LimitMeasure measure;
  try {
    measure = parse_measure_text(text);
    validate(measure);
  } catch (const std::invalid_argument& e) {
    fail(std::string("critical-load.measure: ") + e.what());
  }
  const double lambda = p.positive("lambda");

  double lam_cr = 0.0, z0 = 0.0, residual = 0.0;
  JamReport jams;
  try {
    lam_cr = lambda_critical(measure);
    z0 = z0_limit(measure, lambda);
    residual = z0 < 1.0 ? std::abs(z0 * h_of_z(measure, z0) - lambda) : 0.0;
    jams = classify_jams(measure, lambda);
  } catch (const std::exception& e) {
    fail(std::string("critical-load: ") + e.what());
  }

  Cols cols = {col("lambda_critical"), col("z0"),
               col("saddle_residual", 0.0, kNan, 1e-9), col("bounded"),
               col("witness_bound")};
  for (std::size_t r = 0; r < replicas; ++r) {
    cols[0].values.push_back(lam_cr);
    cols[1].values.push_back(z0);
    cols[2].values.push_back(residual);
    cols[3].values.push_back(jams.bounded ? 1.0 : 0.0);
    cols[4].values.push_back(jams.witness_bound);
  }
  return cols;
}

// ------------------------------------------------------------------ registry

struct Entry {
  ExperimentInfo info;
  std::vector<const char*> keys;
  Runner run;
};

const std::vector<Entry>& registry() {
  static const std::vector<Entry> entries = {
      {{"pointfield",
        "stationary point fields on a window: homogeneous and renewal laws",
        "rate = 1.0\ngap = exponential(1)\nwindow = 50\n"},
       {"rate", "gap", "window"},
       run_pointfield},
      {{"grammar",
        "substitution dynamics on car words: advance, overtake, brake, accelerate",
        "word = 101\nl0 = 1.0\nl1 = 0.5\nt_max = 20\n"},
       {"word", "r", "l0", "l1", "l2plus", "l2minus", "v", "t_max"},
       run_grammar},
      {{"jam",
        "stopped column growth behind a blockage under an incoming car stream",
        "d = 5\nd0plus = 1\ndplus = 3\nv = 1\nt_max = 10000\n"},
       {"d", "d0plus", "dplus", "headway_speeds", "headway_gaps", "lanes", "v",
        "t_max", "moving_gap"},
       run_jam},
      {{"startup",
        "standing traffic setting off: release waves (A) and a lead-car column (B)",
        "model = A\nrho = 0.5\nwindow = 1000\nt_max = 500\n"},
       {"model", "rho", "window", "t_max", "v", "d_eff", "n_cars"},
       run_startup},
      {{"velocity-order",
        "cars with switching driver speeds: contact, queueing and overtaking",
        "n_cars = 80\nlambda = inf\nt_max = 20\n"},
       {"n_cars", "v_a", "v_b", "q_ab", "q_ba", "c1", "c2", "lambda", "rho0",
        "t_max"},
       run_velocity_order},
      {{"road-tandem",
        "fast cars overtaking slow cars one at a time, queue law included",
        "lambda1 = 0.1\nlambda2 = 0.2\nmu = 1\nv1 = 1\nx_max = 10000\n"},
       {"lambda1", "lambda2", "mu", "v1", "v2", "x_max"},
       run_road_tandem},
      {{"road-obstacles",
        "one car through a space-time field of temporary road blocks",
        "lambda = 0.5\nQ = exponential(1)\nF = inf\nv = 1\nx_max = 20000\n"},
       {"lambda", "Q", "F", "v", "x_max"},
       run_road_obstacles},
      {{"road-slowcars",
        "a fast car following and passing slow cars with finite routes",
        "lambda = 0.2\nG = exponential(1)\nF = exponential(1)\nv1 = 2\nv2 = 1\n"
        "x_max = 20000\n"},
       {"lambda", "G", "F", "v1", "v2", "x_max"},
       run_road_slowcars},
      {{"qnet-closed",
        "closed migration network: product-form means against a timed simulation",
        "network = N 2; edge 1 2 1; edge 2 1 1; mu 1 1; mu 2 0.5\nM = 3\n"
        "t_max = 2000\n"},
       {"network", "network_file", "M", "t_max"},
       run_qnet_closed},
      {{"qnet-open",
        "open migration network: geometric stationary law against a timed simulation",
        "network = N 2; edge 1 2 1; mu 1 1; mu 2 0.5; lambda 1 0.3\nt_max = 8000\n"},
       {"network", "network_file", "t_max"},
       run_qnet_open},
      {{"critical-load",
        "critical density and jam classification for a load-limit measure",
        "measure = atom 0.5 1\nlambda = 0.5\n"},
       {"measure", "measure_file", "lambda"},
       run_critical_load},
  };
  return entries;
}

std::uint64_t fnv1a(const std::string& data, std::uint64_t h) {
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace

const std::vector<ExperimentInfo>& experiment_catalog() {
  static const std::vector<ExperimentInfo> infos = [] {
    std::vector<ExperimentInfo> out;
    for (const Entry& e : registry()) out.push_back(e.info);
    return out;
  }();
  return infos;
}

std::map<std::string, std::string> parse_flat_config(std::istream& in) {
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    const std::size_t eq = s.find('=');
    if (eq == std::string::npos)
      fail("config line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (key.empty())
      fail("config line " + std::to_string(lineno) + ": empty key");
    if (!kv.emplace(key, value).second)
      fail("config line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
  }
  return kv;
}

std::map<std::string, std::string> parse_flat_config_text(const std::string& text) {
  std::istringstream in(text);
  return parse_flat_config(in);
}

std::string config_hash(const ExperimentConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  h = fnv1a(config.experiment + '\n', h);
  for (const auto& [key, value] : config.params)
    h = fnv1a(key + '=' + value + '\n', h);
  h = fnv1a("seed=" + std::to_string(config.seed) + '\n', h);
  h = fnv1a("replicas=" + std::to_string(config.replicas) + '\n', h);
  h = fnv1a("format=" + config.format + '\n', h);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

RunReport run_experiment(const ExperimentConfig& config) {
  const Entry* entry = nullptr;
  for (const Entry& e : registry())
    if (e.info.id == config.experiment) entry = &e;
  if (!entry) fail("unknown experiment '" + config.experiment + "'");
  if (config.replicas < 1) fail("replicas: needs at least one replica");
  if (config.format != "csv" && config.format != "json")
    fail("format: must be 'csv' or 'json'");

  Params params(config.experiment, config.params, entry->keys);
  Cols cols = entry->run(params, config.seed, config.replicas);

  RunReport report;
  report.config = config;
  report.config_hash = config_hash(config);
  for (const MetricCol& c : cols) {
    MetricAggregate m = aggregate(c);
    if (m.checked && !m.pass) report.tolerance_ok = false;
    report.metrics.push_back(std::move(m));
  }
  return report;
}

std::string render_csv(const RunReport& report) {
  std::ostringstream out;
  out << "replica";
  for (const auto& m : report.metrics) out << ',' << m.name;
  out << '\n';
  for (std::size_t r = 0; r < report.config.replicas; ++r) {
    out << r;
    for (const auto& m : report.metrics) out << ',' << fmt_g(m.values[r]);
    out << '\n';
  }
  for (const auto& m : report.metrics) {
    out << "# aggregate " << m.name << " mean=" << fmt_g(m.mean)
        << " std_error=" << fmt_g(m.std_error);
    if (!std::isnan(m.analytic)) out << " analytic=" << fmt_g(m.analytic);
    if (m.checked) out << " pass=" << (m.pass ? '1' : '0');
    out << '\n';
  }
  out << "# generator=mt19937_64 seed-derivation=splitmix64(master^splitmix64(index+1))\n";
  out << "# config-hash=" << report.config_hash << '\n';
  return out.str();
}

std::string render_json(const RunReport& report) {
  using nlohmann::json;
  json j;
  j["config"] = {{"experiment", report.config.experiment},
                 {"params", report.config.params},
                 {"seed", report.config.seed},
                 {"replicas", report.config.replicas},
                 {"format", report.config.format}};
  j["config_hash"] = report.config_hash;
  j["generator"] = "mt19937_64";
  j["seed_derivation"] = "splitmix64(master xor splitmix64(index+1))";
  json metrics = json::array();
  for (const auto& m : report.metrics) {
    json jm;
    jm["name"] = m.name;
    jm["values"] = m.values;
    jm["mean"] = m.mean;
    jm["std_error"] = m.std_error;
    jm["analytic"] = std::isnan(m.analytic) ? json() : json(m.analytic);
    jm["rel_tolerance"] = std::isnan(m.rel_tolerance) ? json() : json(m.rel_tolerance);
    jm["abs_tolerance"] = std::isnan(m.abs_tolerance) ? json() : json(m.abs_tolerance);
    jm["pass"] = m.checked ? json(m.pass) : json();
    metrics.push_back(std::move(jm));
  }
  j["metrics"] = std::move(metrics);
  j["pass"] = report.tolerance_ok;
  return j.dump(2) + "\n";
}

}  // namespace traffic
