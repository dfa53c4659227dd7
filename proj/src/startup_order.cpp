#include "trafficlab/startup_order.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>
#include <string>
#include <utility>

#include "trafficlab/stats.hpp"

namespace traffic {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

void require_front_to_back(const std::vector<double>& positions, const char* who) {
  for (std::size_t i = 0; i + 1 < positions.size(); ++i)
    require(std::isfinite(positions[i]) && positions[i] > positions[i + 1],
            std::string(who) + ": positions must strictly decrease front to back");
  if (!positions.empty())
    require(std::isfinite(positions.back()), std::string(who) + ": positions must be finite");
}

void require_horizon(double t_max, const char* who) {
  require(std::isfinite(t_max) && t_max >= 0.0,
          std::string(who) + ": horizon must be finite and nonnegative");
}

}  // namespace

void validate(const StartupSpec& spec) {
  require(std::isfinite(spec.rho) && spec.rho > 0.0, "startup: density must be positive");
  if (spec.model == StartupModel::A) {
    require(spec.rho < 1.0, "startup: release model needs density below one");
  } else {
    require(std::isfinite(spec.v) && spec.v > 0.0, "startup: speed must be positive");
    require(std::isfinite(spec.d_eff) && spec.d_eff > 0.0,
            "startup: blocking distance must be positive");
    require(spec.n_cars >= 1, "startup: column needs at least one car");
  }
}

namespace {

enum class CarState : std::uint8_t { Clocked, Moving, Blocked };

struct PendingEvent {
  double time = 0.0;
  std::uint64_t gen = 0;
  std::size_t car = 0;
  bool operator>(const PendingEvent& o) const {
    if (time != o.time) return time > o.time;
    return car > o.car;
  }
};

}  // namespace

StartupAResult simulate_startup_A(const StartupSpec& spec,
                                  std::vector<double> initial_positions,
                                  double t_max, Rng& rng) {
  validate(spec);
  require(spec.model == StartupModel::A, "startup: spec is not the release model");
  require_horizon(t_max, "startup");
  require_front_to_back(initial_positions, "startup");

  const std::size_t n = initial_positions.size();
  StartupAResult out;
  out.cars.resize(n);

  std::vector<CarState> state(n, CarState::Clocked);
  std::vector<double> x = initial_positions;
  std::vector<double> upd(n, 0.0);  // time of the last position update
  std::vector<std::uint64_t> gen(n, 0);
  std::priority_queue<PendingEvent, std::vector<PendingEvent>, std::greater<PendingEvent>> queue;
  for (std::size_t i = 0; i < n; ++i) {
    out.cars[i].initial_position = initial_positions[i];
    queue.push({rng.exponential(1.0), 0, i});
  }

  auto refresh = [&](std::size_t j, double t) {
    if (state[j] == CarState::Moving) x[j] += t - upd[j];
    upd[j] = t;
  };

  while (!queue.empty()) {
    const PendingEvent ev = queue.top();
    if (ev.time > t_max) break;
    queue.pop();
    const std::size_t i = ev.car;
    if (ev.gen != gen[i]) continue;
    const double t = ev.time;
    if (state[i] == CarState::Clocked) {
      // the car sets off
      refresh(i, t);
      state[i] = CarState::Moving;
      out.cars[i].starts.push_back(t);
      ++gen[i];
      if (i + 1 < n) {
        if (state[i + 1] == CarState::Blocked) {
          state[i + 1] = CarState::Clocked;
          ++gen[i + 1];
          queue.push({t + rng.exponential(1.0), gen[i + 1], i + 1});
        } else if (state[i + 1] == CarState::Moving) {
          // the follower was closing in on this car; that approach is off
          ++gen[i + 1];
          refresh(i + 1, t);
        }
      }
      if (i > 0 && state[i - 1] != CarState::Moving)
        queue.push({t + (x[i - 1] - x[i]), gen[i], i});
    } else {
      // the car reaches the standing car ahead and waits at its position
      assert(state[i] == CarState::Moving && i > 0 && state[i - 1] != CarState::Moving);
      refresh(i, t);
      x[i] = x[i - 1];
      state[i] = CarState::Blocked;
      out.cars[i].stops.push_back(t);
      ++gen[i];
      if (i + 1 < n && state[i + 1] == CarState::Moving) {
        ++gen[i + 1];
        refresh(i + 1, t);
        queue.push({t + (x[i] - x[i + 1]), gen[i + 1], i + 1});
      }
    }
  }

  // A car never stops again once every car ahead of it is under way.
  std::size_t moving_prefix = 0;
  while (moving_prefix < n && state[moving_prefix] == CarState::Moving) ++moving_prefix;
  for (std::size_t i = 0; i < moving_prefix; ++i) out.cars[i].finalized = true;
  out.completed = moving_prefix == n;

  // Position minus elapsed time is constant for a car that never stops again,
  // so the settled spacing can be read off without advancing the clock.
  if (moving_prefix > 1) {
    out.gaps.reserve(moving_prefix - 1);
    for (std::size_t i = 1; i < moving_prefix; ++i) {
      const double ahead = x[i - 1] - upd[i - 1];
      const double behind = x[i] - upd[i];
      out.gaps.push_back(ahead - behind);
    }
  }
  return out;
}

StartupAResult simulate_startup_A(const StartupSpec& spec, double window,
                                  double t_max, Rng& rng) {
  validate(spec);
  require(spec.model == StartupModel::A, "startup: spec is not the release model");
  require(std::isfinite(window) && window > 0.0, "startup: window must be positive");
  const std::size_t n = static_cast<std::size_t>(rng.poisson(spec.rho * window));
  std::vector<double> pos(n);
  for (auto& p : pos) p = rng.uniform(0.0, window);
  std::sort(pos.begin(), pos.end(), std::greater<double>());
  return simulate_startup_A(spec, std::move(pos), t_max, rng);
}

StartupBResult simulate_startup_B(const StartupSpec& spec,
                                  std::vector<double> initial_positions,
                                  double t_max) {
  validate(spec);
  require(spec.model == StartupModel::B, "startup: spec is not the column model");
  require_horizon(t_max, "startup");
  require_front_to_back(initial_positions, "startup");

  const std::size_t n = initial_positions.size();
  StartupBResult out;
  out.records.resize(n);
  if (n == 0) {
    out.completed = true;
    return out;
  }

  const double d = spec.d_eff;
  const double v = spec.v;
  std::vector<double> x = initial_positions;
  // A pair that touches a gap of exactly d stays locked at d forever: stops
  // and starts cross it instantly. The latch keeps that identity exact and
  // bounds the crossing count by the car count.
  std::vector<std::uint8_t> moving(n, 0), latch(n, 0), seen(n, 0), next(n, 0);
  double t = 0.0;

  auto resolve = [&]() {
    next[0] = 1;
    for (std::size_t k = 1; k < n; ++k) {
      if (!latch[k]) {
        const double gap = x[k - 1] - x[k];
        if (gap != d) {
          next[k] = gap > d ? 1 : 0;
          continue;
        }
        latch[k] = 1;
      }
      next[k] = next[k - 1];
    }
    for (std::size_t k = 0; k < n; ++k) {
      if (next[k] && !moving[k]) {
        StartupBRecord& rec = out.records[k];
        if (!seen[k]) {
          rec.first_move = t;
          seen[k] = 1;
        }
        rec.final_move = t;
        rec.lead_distance = v * t - x[k];
      } else if (moving[k] && !next[k]) {
        ++out.records[k].stops;
      }
      moving[k] = next[k];
    }
  };

  // Every pass either advances the clock or latches a pair, so it ends.
  resolve();
  std::vector<std::size_t> crossers;
  for (;;) {
    double best = kInf;
    crossers.clear();
    for (std::size_t k = 1; k < n; ++k) {
      if (latch[k]) continue;
      const double gap = x[k - 1] - x[k];
      double cand = kInf;
      if (moving[k] && !moving[k - 1]) {
        // clamp: rounding may put an already-reached crossing a hair early
        cand = std::max(t, t + (gap - d) / v);
      } else if (!moving[k] && moving[k - 1] && gap < d) {
        cand = std::max(t, t + (d - gap) / v);
      }
      if (cand < best) {
        best = cand;
        crossers.assign(1, k);
      } else if (cand == best && std::isfinite(cand)) {
        crossers.push_back(k);
      }
    }
    if (best > t_max) break;
    const double dt = best - t;
    for (std::size_t k = 0; k < n; ++k) {
      if (latch[k])
        x[k] = x[k - 1] - d;
      else if (moving[k])
        x[k] += v * dt;
    }
    t = best;
    for (std::size_t k : crossers) {
      x[k] = x[k - 1] - d;
      latch[k] = 1;
    }
    resolve();
  }

  std::size_t moving_prefix = 0;
  while (moving_prefix < n && moving[moving_prefix]) ++moving_prefix;
  for (std::size_t k = 0; k < moving_prefix; ++k) out.records[k].finalized = true;
  out.completed = moving_prefix == n;
  return out;
}

StartupBResult simulate_startup_B(const StartupSpec& spec, double t_max, Rng& rng) {
  validate(spec);
  require(spec.model == StartupModel::B, "startup: spec is not the column model");
  std::vector<double> pos(spec.n_cars);
  pos[0] = 0.0;
  for (std::size_t k = 1; k < spec.n_cars; ++k)
    pos[k] = pos[k - 1] - rng.exponential(spec.rho);
  return simulate_startup_B(spec, std::move(pos), t_max);
}

void validate(const VelocityFlowSpec& spec) {
  require(std::isfinite(spec.c1) && std::isfinite(spec.c2) && spec.c1 > 0.0,
          "velocity flow: speed bounds must be positive and finite");
  require(std::isfinite(spec.v_a) && std::isfinite(spec.v_b),
          "velocity flow: driver speeds must be finite");
  require(spec.c1 < spec.v_a && spec.v_a < spec.v_b && spec.v_b < spec.c2,
          "velocity flow: needs c1 < v_a < v_b < c2");
  require(std::isfinite(spec.q_ab) && spec.q_ab > 0.0 && std::isfinite(spec.q_ba) &&
              spec.q_ba > 0.0,
          "velocity flow: switch rates must be positive");
  require(std::isfinite(spec.rho0) && spec.rho0 > 0.0,
          "velocity flow: gap density must be positive");
  require(!std::isnan(spec.lambda_overtake) && spec.lambda_overtake >= 0.0,
          "velocity flow: overtake intensity must be nonnegative");
}

namespace {

// Piecewise-constant-velocity event loop. Positions of a touching pair are
// kept bitwise equal: the catch snaps them together and equal velocities
// advance them by identical increments afterwards.
class VelocityEngine {
 public:
  VelocityEngine(const VelocityFlowSpec& spec, const std::vector<double>& gaps,
                 std::vector<std::uint8_t> fast, Rng& rng)
      : spec_(spec), rng_(rng), n_(spec.n_cars), fast_(std::move(fast)) {
    x_.resize(n_);
    w_.resize(n_);
    vel_.resize(n_);
    switch_at_.resize(n_);
    overtake_at_.assign(n_, kInf);
    order_.resize(n_);
    rank_.resize(n_);
    touch_.assign(n_, 0);
    double pos = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      if (i > 0) pos -= gaps[i - 1];
      x_[i] = pos;
      w_[i] = fast_[i] ? spec.v_b : spec.v_a;
      switch_at_[i] = rng.exponential(fast_[i] ? spec.q_ba : spec.q_ab);
      order_[i] = i;
      rank_[i] = i;
    }
    resolve();
  }

  void run(double t_max, const std::vector<double>& snaps, VelocityFlowTrace& out) {
    std::size_t si = 0;
    for (;;) {
      // next event: switch beats catch beats overtake on exact ties
      double tn = t_max;
      int kind = 0;  // 0 horizon, 1 switch, 2 catch, 3 overtake
      std::size_t who = 0;
      for (std::size_t i = 0; i < n_; ++i)
        if (switch_at_[i] < tn) {
          tn = switch_at_[i];
          kind = 1;
          who = i;
        }
      for (std::size_t r = 1; r < n_; ++r) {
        if (touch_[r]) continue;
        const std::size_t f = order_[r];
        const std::size_t p = order_[r - 1];
        if (vel_[f] > vel_[p]) {
          const double tc =
              std::max(t_, t_ + (x_[p] - x_[f]) / (vel_[f] - vel_[p]));
          if (tc < tn) {
            tn = tc;
            kind = 2;
            who = r;
          }
        }
      }
      if (std::isfinite(spec_.lambda_overtake)) {
        for (std::size_t i = 0; i < n_; ++i)
          if (overtake_at_[i] < tn) {
            tn = overtake_at_[i];
            kind = 3;
            who = i;
          }
      }
      // snapshots up to the event time see the state just before it
      while (si < snaps.size() && snaps[si] <= tn) {
        advance(snaps[si]);
        record(out);
        ++si;
      }
      if (kind == 0) {
        advance(t_max);
        return;
      }
      advance(tn);
      if (kind == 1) {
        const std::size_t i = who;
        fast_[i] ^= 1;
        w_[i] = fast_[i] ? spec_.v_b : spec_.v_a;
        switch_at_[i] = t_ + rng_.exponential(fast_[i] ? spec_.q_ba : spec_.q_ab);
        ++out.switches;
      } else if (kind == 2) {
        const std::size_t r = who;
        x_[order_[r]] = x_[order_[r - 1]];
        touch_[r] = 1;
        ++out.catches;
      } else {
        const std::size_t r = rank_[who];
        assert(r > 0 && touch_[r] && w_[who] > vel_[order_[r - 1]]);
        swap_rank(r);
        overtake_at_[who] = kInf;
        ++out.overtakes;
      }
      resolve();
      if (spec_.lambda_overtake == kInf) settle(out);
      arm();
    }
  }

 private:
  void advance(double to) {
    const double dt = to - t_;
    if (dt > 0.0)
      for (std::size_t i = 0; i < n_; ++i) x_[i] += vel_[i] * dt;
    t_ = to;
  }

  // Front to back: a stuck car copies the velocity ahead while its driver
  // speed stays at or above it, and parts the moment that fails.
  void resolve() {
    for (std::size_t r = 0; r < n_; ++r) {
      const std::size_t id = order_[r];
      if (r > 0 && touch_[r]) {
        const std::size_t pred = order_[r - 1];
        if (w_[id] >= vel_[pred]) {
          vel_[id] = vel_[pred];
          continue;
        }
        touch_[r] = 0;
      }
      vel_[id] = w_[id];
    }
  }

  // Swap ranks r-1 and r. Positions are already equal; the overtaken car is
  // touched from behind by the overtaker, and contact with the car further
  // ahead carries over by position equality.
  void swap_rank(std::size_t r) {
    const std::size_t i = order_[r];
    const std::size_t p = order_[r - 1];
    order_[r - 1] = i;
    order_[r] = p;
    rank_[i] = r - 1;
    rank_[p] = r;
    touch_[r] = 1;
  }

  // Immediate-overtake mode: swap every eligible pair until none is left.
  void settle(VelocityFlowTrace& out) {
    bool again = true;
    while (again) {
      again = false;
      for (std::size_t r = 1; r < n_; ++r) {
        const std::size_t id = order_[r];
        if (touch_[r] && w_[id] > vel_[order_[r - 1]]) {
          swap_rank(r);
          ++out.overtakes;
          resolve();
          again = true;
          break;
        }
      }
    }
  }

  // Overtake clocks run exactly while the car is stuck with a strictly
  // faster driver speed; memorylessness lets a cleared clock redraw fresh.
  void arm() {
    const double lam = spec_.lambda_overtake;
    const bool can = std::isfinite(lam) && lam > 0.0;
    if (n_ > 0) overtake_at_[order_[0]] = kInf;
    for (std::size_t r = 1; r < n_; ++r) {
      const std::size_t id = order_[r];
      const bool valid = can && touch_[r] && w_[id] > vel_[order_[r - 1]];
      if (!valid)
        overtake_at_[id] = kInf;
      else if (overtake_at_[id] == kInf)
        overtake_at_[id] = t_ + rng_.exponential(lam);
    }
  }

  void record(VelocityFlowTrace& out) const {
    VelocitySnapshot snap;
    snap.t = t_;
    snap.order = order_;
    snap.position = x_;
    snap.velocity = vel_;
    snap.driver = w_;
    snap.contact = touch_;
    out.snapshots.push_back(std::move(snap));
  }

  const VelocityFlowSpec& spec_;
  Rng& rng_;
  std::size_t n_;
  std::vector<std::uint8_t> fast_;
  double t_ = 0.0;
  std::vector<double> x_, w_, vel_, switch_at_, overtake_at_;
  std::vector<std::size_t> order_, rank_;
  std::vector<std::uint8_t> touch_;
};

}  // namespace

VelocityFlowTrace simulate_velocity_flow(const VelocityFlowSpec& spec,
                                         std::vector<double> initial_gaps,
                                         std::vector<std::uint8_t> initial_fast,
                                         double t_max,
                                         const std::vector<double>& snapshot_times,
                                         Rng& rng) {
  validate(spec);
  require_horizon(t_max, "velocity flow");
  const std::size_t n = spec.n_cars;
  require(initial_gaps.size() == (n > 0 ? n - 1 : 0),
          "velocity flow: needs one initial gap per following car");
  for (double g : initial_gaps)
    require(std::isfinite(g) && g > 0.0, "velocity flow: initial gaps must be positive");
  require(initial_fast.size() == n, "velocity flow: needs one driver state per car");
  for (std::size_t i = 0; i + 1 < snapshot_times.size(); ++i)
    require(snapshot_times[i] <= snapshot_times[i + 1],
            "velocity flow: snapshot times must be nondecreasing");
  for (double s : snapshot_times)
    require(std::isfinite(s) && s >= 0.0 && s <= t_max,
            "velocity flow: snapshot times must lie in [0, horizon]");

  VelocityFlowTrace out;
  VelocityEngine engine(spec, initial_gaps, std::move(initial_fast), rng);
  engine.run(t_max, snapshot_times, out);
  return out;
}

VelocityFlowTrace simulate_velocity_flow(const VelocityFlowSpec& spec, double t_max,
                                         const std::vector<double>& snapshot_times,
                                         Rng& rng) {
  validate(spec);
  const std::size_t n = spec.n_cars;
  std::vector<double> gaps(n > 0 ? n - 1 : 0);
  for (auto& g : gaps) g = rng.exponential(spec.rho0);
  std::vector<std::uint8_t> fast(n);
  const double p_fast = spec.q_ab / (spec.q_ab + spec.q_ba);
  for (auto& f : fast) f = rng.uniform() < p_fast ? 1 : 0;
  return simulate_velocity_flow(spec, std::move(gaps), std::move(fast), t_max,
                                snapshot_times, rng);
}

CovarianceEstimate covariance_estimate(const std::vector<VelocityFlowTrace>& traces,
                                       std::size_t i, std::size_t j, double t) {
  require(traces.size() >= 2, "covariance: needs at least two replicas");
  std::vector<double> vi, vj;
  vi.reserve(traces.size());
  vj.reserve(traces.size());
  const double tol = 1e-9 * std::max(1.0, std::abs(t));
  for (const auto& trace : traces) {
    const VelocitySnapshot* hit = nullptr;
    for (const auto& snap : trace.snapshots) {
      if (std::abs(snap.t - t) <= tol) {
        hit = &snap;
        break;
      }
    }
    require(hit != nullptr, "covariance: no snapshot at the requested time");
    require(i < hit->velocity.size() && j < hit->velocity.size(),
            "covariance: car index out of range");
    vi.push_back(hit->velocity[i]);
    vj.push_back(hit->velocity[j]);
  }
  CovarianceEstimate est;
  est.value = sample_covariance(vi, vj);
  // the leave-one-out error needs a third replica; two give only the value
  est.std_error = vi.size() >= 3 ? jackknife_cov_se(vi, vj) : kNan;
  return est;
}

std::vector<PhaseSweepRow> phase_sweep(const VelocityFlowSpec& base,
                                       const std::vector<double>& lambda_grid,
                                       double t_max, std::size_t replicas, Rng& rng) {
  require(!lambda_grid.empty(), "phase sweep: grid must be nonempty");
  require(replicas >= 1, "phase sweep: needs at least one replica");
  require_horizon(t_max, "phase sweep");
  validate(base);

  const std::size_t n = base.n_cars;
  std::vector<PhaseSweepRow> rows;
  rows.reserve(lambda_grid.size());
  std::vector<std::vector<double>> vel_by_rank(n);
  const std::vector<double> snap_times = {t_max};

  for (double lam : lambda_grid) {
    VelocityFlowSpec spec = base;
    spec.lambda_overtake = lam;
    validate(spec);
    PhaseSweepRow row;
    row.lambda = lam;
    for (auto& column : vel_by_rank) column.clear();
    double cluster_sum = 0.0;
    for (std::size_t rep = 0; rep < replicas; ++rep) {
      const VelocityFlowTrace trace = simulate_velocity_flow(spec, t_max, snap_times, rng);
      const VelocitySnapshot& snap = trace.snapshots.back();
      std::size_t heads = 0;
      for (std::size_t r = 0; r < n; ++r) {
        vel_by_rank[r].push_back(snap.velocity[snap.order[r]]);
        if (r == 0 || !snap.contact[r]) ++heads;
      }
      if (n > 0) cluster_sum += static_cast<double>(n) / static_cast<double>(heads);
    }
    row.mean_cluster_size =
        n > 0 ? cluster_sum / static_cast<double>(replicas) : kNan;
    if (n >= 2 && replicas >= 2) {
      double cov_sum = 0.0;
      double var_sum = 0.0;
      for (std::size_t r = 0; r + 1 < n; ++r) {
        cov_sum += sample_covariance(vel_by_rank[r], vel_by_rank[r + 1]);
        const double se = jackknife_cov_se(vel_by_rank[r], vel_by_rank[r + 1]);
        var_sum += se * se;
      }
      row.mean_nn_covariance = cov_sum / static_cast<double>(n - 1);
      row.nn_covariance_se = std::sqrt(var_sum) / static_cast<double>(n - 1);
      row.defined = true;
    } else {
      row.mean_nn_covariance = kNan;
      row.nn_covariance_se = kNan;
      row.defined = false;
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace traffic
