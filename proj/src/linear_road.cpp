#include "trafficlab/linear_road.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "trafficlab/numerics.hpp"

namespace traffic {

namespace {

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

// Points where a law's cdf jumps or kinks; quadrature splits there.
std::vector<double> law_kinks(const DistributionSpec& d) {
  switch (d.kind) {
    case DistKind::exponential:
      return {};
    case DistKind::deterministic:
      return {d.value};
    case DistKind::uniform:
      return {d.lo, d.hi};
    case DistKind::discrete:
    case DistKind::empirical:
      return d.atoms;
  }
  return {};
}

// Finite truncation point for the survival of F; the dropped tail mass of
// min(eta, zeta) is below 1e-13 / rate for every supported kind.
double survival_cutoff(const DistributionSpec& f) {
  double hi = f.support_max();
  if (std::isfinite(hi)) return hi;
  return f.quantile(1.0 - 1e-13);
}

double stable_service_gap(const TandemSpec& spec) {
  double gap = spec.mu - spec.lambda1 * (spec.v1 - spec.v2);
  if (gap <= 0.0)
    throw std::domain_error(
        "tandem instability: lambda1*(v1-v2) >= mu, queues diverge");
  return gap;
}

// Queue length at `horizon` started from empty; arrivals Poisson(arr),
// services exponential(mu). A Poisson arrival at that moment sees this law.
long queue_state_after(double arr, double mu, double horizon, Rng& rng) {
  double t = 0.0;
  long n = 0;
  for (;;) {
    double total = arr + (n > 0 ? mu : 0.0);
    if (total <= 0.0) break;
    double dt = rng.exponential(total);
    if (t + dt >= horizon) break;
    t += dt;
    if (rng.uniform() * total < arr)
      ++n;
    else
      --n;
  }
  return n;
}

struct Obstacle {
  double x = 0.0;
  double birth = 0.0;
  double death = 0.0;
};

// One car through a space-time Poisson field of blocking points, worked in
// a frame where the blockers stand still. The car advances at v; the
// reported position is xi + drift*t and the run ends when it hits x_max.
// Births are generated strip by strip, each strip covering a box of times
// wide enough for every crossing decided so far; whenever the car's clock
// outruns the generated box, a fresh disjoint box ahead of the car is
// filled in, which leaves the field's law intact.
RoadSimResult run_field_engine(double lambda, const DistributionSpec& Q,
                               const DistributionSpec& F, double v, double drift,
                               double x_max, Rng& rng) {
  RoadSimResult out;
  const double vr = v + drift;
  if (lambda <= 0.0) {
    out.total_time = x_max / vr;
    out.mean_speed = vr;
    return out;
  }

  // Births older than the lookback are dropped. For unbounded lifetimes the
  // cutoff is sized so the expected number of dropped-but-blocking obstacles
  // over the whole run stays below 1e-9; 1 - equilibrium_cdf(A) is exactly
  // the fraction of alive mass older than A.
  const double q_hi = Q.support_max();
  double lookback;
  if (std::isfinite(q_hi)) {
    lookback = q_hi;
  } else {
    const double budget = 1e-9 / (lambda * x_max * Q.mean());
    double lo = 0.0, hi = 10.0 * Q.quantile(0.999);
    if (1.0 - equilibrium_cdf(Q, hi) <= budget) {
      for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        (1.0 - equilibrium_cdf(Q, mid) <= budget ? hi : lo) = mid;
      }
    }
    lookback = hi;
  }
  const double width = std::min(
      x_max, std::max({v * lookback / 10.0,
                       32.0 / std::max(lambda * (lookback + 1.0), 1e-12), 1e-6}));

  double xi = 0.0;
  double t = 0.0;
  bool done = false;

  std::vector<Obstacle> obs;
  auto by_x = [](const Obstacle& a, const Obstacle& b) { return a.x < b.x; };
  auto gen_box = [&](double xlo, double xhi, double tlo, double thi) {
    if (xhi <= xlo || thi <= tlo) return;
    long n = rng.poisson(lambda * (xhi - xlo) * (thi - tlo));
    for (long i = 0; i < n; ++i) {
      Obstacle ob;
      ob.x = rng.uniform(xlo, xhi);
      ob.birth = rng.uniform(tlo, thi);
      ob.death = ob.birth + Q.sample(rng);
      obs.push_back(ob);
    }
  };

  for (std::size_t si = 0; !done; ++si) {
    const double strip_lo = static_cast<double>(si) * width;
    if (strip_lo >= x_max) break;
    const double strip_hi = std::min(static_cast<double>(si + 1) * width, x_max);

    obs.clear();
    gen_box(strip_lo, strip_hi, t - lookback, t + (strip_hi - xi) / v);
    double t_gen = t + (strip_hi - xi) / v;
    std::sort(obs.begin(), obs.end(), by_x);
    std::size_t k = 0;

    while (!done) {
      const double x_next = (k < obs.size()) ? obs[k].x : strip_hi;
      const double t_arr = t + (x_next - xi) / v;

      if (t_arr > t_gen) {
        // crossing decided for times beyond the generated box: fill ahead
        double t_new = t_arr + std::max((strip_hi - strip_lo) / v, 1.0);
        std::size_t old = obs.size();
        gen_box(xi, strip_hi, t_gen, t_new);
        t_gen = t_new;
        std::sort(obs.begin() + static_cast<std::ptrdiff_t>(old), obs.end(), by_x);
        std::inplace_merge(obs.begin() + static_cast<std::ptrdiff_t>(k),
                           obs.begin() + static_cast<std::ptrdiff_t>(old),
                           obs.end(), by_x);
        continue;
      }

      if (x_next + drift * t_arr >= x_max) {
        // reported position reaches x_max inside this move
        t += (x_max - (xi + drift * t)) / vr;
        done = true;
        break;
      }

      if (k >= obs.size()) {
        xi = strip_hi;
        t = t_arr;
        break;
      }

      const Obstacle ob = obs[k];
      ++k;
      if (ob.birth <= t_arr && t_arr < ob.death) {
        const double zeta = ob.death - t_arr;
        const double delay = F.is_never() ? zeta : std::min(F.sample(rng), zeta);
        const double r_enc = ob.x + drift * t_arr;
        out.encounter_x.push_back(r_enc);
        if (drift > 0.0 && r_enc + drift * delay >= x_max) {
          const double elapsed = (x_max - r_enc) / drift;
          out.delays.push_back(elapsed);
          t = t_arr + elapsed;
          done = true;
          break;
        }
        out.delays.push_back(delay);
        xi = ob.x;
        t = t_arr + delay;
      }
    }
  }

  if (drift == 0.0) {
    // regrouped total: motion is exactly x_max/v, so the reported time
    // satisfies T == x_max/v + sum(delays) bitwise
    double idle = 0.0;
    for (double d : out.delays) idle += d;
    t = x_max / v + idle;
  }
  out.total_time = t;
  out.mean_speed = x_max / t;
  return out;
}

}  // namespace

void validate(const TandemSpec& spec) {
  require(spec.lambda1 >= 0.0, "lambda1 must be >= 0");
  require(spec.lambda2 >= 0.0, "lambda2 must be >= 0");
  require(spec.mu > 0.0 && std::isfinite(spec.mu), "mu must be positive");
  require(spec.v2 >= 0.0, "v2 must be >= 0");
  require(spec.v1 > spec.v2, "v1 must exceed v2");
  require(std::isfinite(spec.v1), "v1 must be finite");
}

double tandem_utilization(const TandemSpec& spec) {
  validate(spec);
  return spec.lambda1 * (spec.v1 - spec.v2) / spec.mu;
}

double mean_overtake_time(const TandemSpec& spec) {
  validate(spec);
  return 1.0 / stable_service_gap(spec);
}

double tandem_mean_speed(const TandemSpec& spec) {
  validate(spec);
  const double v = spec.v1 - spec.v2;
  const double gap = stable_service_gap(spec);
  const double rel = 1.0 / (spec.lambda2 / gap + 1.0 / v);
  return rel + spec.v2;
}

QueueLaw mm1_queue_distribution(const TandemSpec& spec) {
  validate(spec);
  const double gap = stable_service_gap(spec);
  QueueLaw law;
  law.r = spec.lambda1 * (spec.v1 - spec.v2) / spec.mu;
  law.mean_overtake_time = 1.0 / gap;
  double term = 1.0 - law.r;
  double tail = law.r;  // mass beyond the current truncation
  law.pmf.push_back(term);
  while (tail >= 1e-12) {
    term *= law.r;
    law.pmf.push_back(term);
    tail *= law.r;
  }
  return law;
}

TandemSimResult simulate_tandem(const TandemSpec& spec, double x_max, Rng& rng) {
  validate(spec);
  require(x_max > 0.0 && std::isfinite(x_max), "x_max must be positive");
  const double gap = stable_service_gap(spec);
  const double v = spec.v1 - spec.v2;
  const double arr = spec.lambda1 * v;  // flux of fast cars past one slow car
  const double horizon = 50.0 / gap;

  TandemSimResult out;
  double xi = 0.0;  // distance covered relative to the slow cars
  double t = 0.0;
  double station = rng.exponential(spec.lambda2);
  for (;;) {
    const double t_arr = t + (station - xi) / v;
    if (station + spec.v2 * t_arr >= x_max) {
      t += (x_max - (xi + spec.v2 * t)) / spec.v1;
      break;
    }
    const long queued = queue_state_after(arr, spec.mu, horizon, rng);
    double sojourn = 0.0;
    for (long i = 0; i <= queued; ++i) sojourn += rng.exponential(spec.mu);
    const double r_enc = station + spec.v2 * t_arr;
    if (spec.v2 > 0.0 && r_enc + spec.v2 * sojourn >= x_max) {
      t = t_arr + (x_max - r_enc) / spec.v2;
      break;
    }
    xi = station;
    t = t_arr + sojourn;
    ++out.stations;
    station += rng.exponential(spec.lambda2);
  }
  out.total_time = t;
  out.mean_speed = x_max / t;
  return out;
}

std::vector<double> mm1_occupancy_sim(double arrival_rate, double service_rate,
                                      std::size_t events, Rng& rng) {
  require(arrival_rate >= 0.0, "arrival rate must be >= 0");
  require(service_rate > 0.0, "service rate must be positive");
  require(arrival_rate < service_rate, "queue unstable: arrivals >= service");
  std::vector<double> weight(1, 0.0);
  if (arrival_rate == 0.0) {
    weight[0] = 1.0;
    return weight;
  }
  double total = 0.0;
  long n = 0;
  for (std::size_t e = 0; e < events; ++e) {
    const double rate = arrival_rate + (n > 0 ? service_rate : 0.0);
    const double dt = rng.exponential(rate);
    if (static_cast<std::size_t>(n) >= weight.size()) weight.resize(n + 1, 0.0);
    weight[static_cast<std::size_t>(n)] += dt;
    total += dt;
    if (rng.uniform() * rate < arrival_rate)
      ++n;
    else
      --n;
  }
  for (double& w : weight) w /= total;
  return weight;
}

double ResidualLife::density(double t) const {
  return equilibrium_density(lifetime, t);
}

double ResidualLife::cdf(double t) const { return equilibrium_cdf(lifetime, t); }

double ResidualLife::sample(Rng& rng) const {
  return equilibrium_sample(lifetime, rng);
}

ResidualLife residual_life_density(const DistributionSpec& Q) {
  validate(Q);
  require(!Q.is_never() && std::isfinite(Q.mean()), "lifetime mean must be finite");
  require(Q.mean() > 0.0, "lifetime mean must be positive");
  ResidualLife r;
  r.lifetime = Q;
  r.mean = equilibrium_mean(Q);
  return r;
}

double obstacle_delay_mean(const DistributionSpec& Q, const DistributionSpec& F) {
  const ResidualLife zeta = residual_life_density(Q);
  validate(F);
  if (F.is_never()) return zeta.mean;
  if (F.support_max() == 0.0) return 0.0;

  double s_hi = survival_cutoff(F);
  const double q_hi = Q.support_max();
  if (std::isfinite(q_hi)) s_hi = std::min(s_hi, q_hi);

  std::vector<double> cuts = law_kinks(F);
  const std::vector<double> qk = law_kinks(Q);
  cuts.insert(cuts.end(), qk.begin(), qk.end());

  const double a = integrate(
      [&](double s) { return F.survival(s) * (1.0 - equilibrium_cdf(Q, s)); },
      0.0, s_hi, cuts, 1e-12);
  if (!std::isfinite(a)) throw std::runtime_error("delay mean integral diverged");
  return a;
}

void validate(const ObstacleRoadSpec& spec) {
  require(spec.lambda >= 0.0 && std::isfinite(spec.lambda),
          "lambda must be >= 0 and finite");
  require(spec.v > 0.0 && std::isfinite(spec.v), "v must be positive");
  validate(spec.F);
  validate(spec.Q);
  if (spec.lambda > 0.0) {
    require(!spec.Q.is_never() && std::isfinite(spec.Q.mean()),
            "Q needs a finite mean");
    require(spec.Q.mean() > 0.0, "Q needs a positive mean");
    require(std::isfinite(spec.Q.second_moment()),
            "Q needs a finite second moment");
  }
}

double encounter_rate(const ObstacleRoadSpec& spec) {
  validate(spec);
  return spec.lambda > 0.0 ? spec.lambda * spec.Q.mean() : 0.0;
}

double mean_speed_obstacles(const ObstacleRoadSpec& spec) {
  validate(spec);
  if (spec.lambda <= 0.0) return spec.v;
  const double a = obstacle_delay_mean(spec.Q, spec.F);
  const double b = spec.lambda * spec.Q.mean();
  return spec.v / (1.0 + a * b * spec.v);
}

RoadSimResult simulate_obstacle_road(const ObstacleRoadSpec& spec, double x_max,
                                     Rng& rng) {
  validate(spec);
  require(x_max > 0.0 && std::isfinite(x_max), "x_max must be positive");
  return run_field_engine(spec.lambda, spec.Q, spec.F, spec.v, 0.0, x_max, rng);
}

void validate(const SlowCarRoadSpec& spec) {
  require(spec.lambda >= 0.0 && std::isfinite(spec.lambda),
          "lambda must be >= 0 and finite");
  require(spec.v2 > 0.0, "v2 must be positive");
  require(spec.v1 >= spec.v2 && std::isfinite(spec.v1),
          "v1 must be >= v2 and finite");
  validate(spec.F);
  validate(spec.G);
  if (spec.lambda > 0.0) {
    require(!spec.G.is_never() && std::isfinite(spec.G.mean()),
            "G needs a finite mean");
    require(spec.G.mean() > 0.0, "G needs a positive mean");
    require(std::isfinite(spec.G.second_moment()),
            "G needs a finite second moment");
  }
}

double slow_car_interaction_rate(const SlowCarRoadSpec& spec) {
  validate(spec);
  if (spec.lambda <= 0.0) return 0.0;
  return spec.lambda * spec.G.mean() * (1.0 / spec.v2 - 1.0 / spec.v1);
}

double slow_car_delay_mean(const SlowCarRoadSpec& spec) {
  validate(spec);
  require(spec.G.mean() > 0.0, "G needs a positive mean");
  if (spec.F.is_never()) return equilibrium_mean(spec.G);
  if (spec.F.support_max() == 0.0) return 0.0;

  // length domain: gamma = min(v2*tau, beta) with beta ~ residual route
  double s_hi = spec.v2 * survival_cutoff(spec.F);
  const double g_hi = spec.G.support_max();
  if (std::isfinite(g_hi)) s_hi = std::min(s_hi, g_hi);

  std::vector<double> cuts;
  for (double u : law_kinks(spec.F)) cuts.push_back(spec.v2 * u);
  for (double u : law_kinks(spec.G)) cuts.push_back(u);

  const double c = integrate(
      [&](double s) {
        return spec.F.survival(s / spec.v2) * (1.0 - equilibrium_cdf(spec.G, s));
      },
      0.0, s_hi, cuts, 1e-12);
  if (!std::isfinite(c)) throw std::runtime_error("delay mean integral diverged");
  return c;
}

double mean_speed_slow_cars(const SlowCarRoadSpec& spec) {
  validate(spec);
  if (spec.lambda <= 0.0 || spec.v1 == spec.v2) return spec.v1;
  const double d = slow_car_interaction_rate(spec);
  const double c = slow_car_delay_mean(spec);
  return (1.0 + d * c) / (1.0 + d * c * spec.v1 / spec.v2) * spec.v1;
}

RoadSimResult simulate_slow_car_road(const SlowCarRoadSpec& spec, double x_max,
                                     Rng& rng) {
  validate(spec);
  require(x_max > 0.0 && std::isfinite(x_max), "x_max must be positive");
  require(spec.v1 > spec.v2, "simulation needs v1 > v2");
  // comoving frame: slow cars stand still, live for (route length)/v2
  return run_field_engine(spec.lambda, spec.G.scaled(1.0 / spec.v2), spec.F,
                          spec.v1 - spec.v2, spec.v2, x_max, rng);
}

}  // namespace traffic
