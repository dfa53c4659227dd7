#include "trafficlab/grammar_flow.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>

#include "trafficlab/stats.hpp"

namespace traffic {

namespace {

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

bool finite_nonneg(double x) { return std::isfinite(x) && x >= 0.0; }

void check_symbols(const std::string& word) {
  for (char c : word)
    require(c == '0' || c == '1' || c == '2', "word symbols must be 0, 1 or 2");
}

// Matches of the four substitution patterns at position j. The word reads
// rear to front, so word[j+1] is the cell ahead of word[j].
bool match_advance(const std::string& w, std::size_t j) {
  return w[j] == '1' && w[j + 1] == '0';
}
bool match_overtake(const std::string& w, std::size_t j) {
  return j + 2 < w.size() && w[j] == '1' && w[j + 1] == '2' && w[j + 2] == '0';
}
bool match_brake(const std::string& w, std::size_t j) {
  return w[j] == '2' && w[j + 1] != '0';
}
bool match_accelerate(const std::string& w, std::size_t j) {
  return j + 2 < w.size() && w[j] == '2' && w[j + 1] == '0' && w[j + 2] == '0';
}

void apply_move(std::string& w, GrammarRule rule, std::size_t j) {
  switch (rule) {
    case GrammarRule::drift:
      break;
    case GrammarRule::advance:
      w[j] = '0';
      w[j + 1] = '1';
      break;
    case GrammarRule::overtake:
      w[j] = '0';
      w[j + 2] = '1';
      break;
    case GrammarRule::brake:
      w.insert(j + 1, 1, '0');
      break;
    case GrammarRule::accelerate:
      w[j] = '0';
      w[j + 1] = '2';
      break;
  }
}

}  // namespace

void validate(const GrammarSpec& spec) {
  require(finite_nonneg(spec.lambda0_plus), "lambda0_plus must be >= 0");
  require(finite_nonneg(spec.lambda1_plus), "lambda1_plus must be >= 0");
  require(finite_nonneg(spec.lambda2_plus), "lambda2_plus must be >= 0");
  require(finite_nonneg(spec.lambda2_minus), "lambda2_minus must be >= 0");
  require(finite_nonneg(spec.v), "v must be >= 0");
}

void validate(const GrammarState& state) {
  require(!state.word.empty(), "word must be nonempty");
  check_symbols(state.word);
  require(state.word.back() != '0', "front symbol must be a car");
}

std::array<std::size_t, 3> symbol_counts(const std::string& word) {
  std::array<std::size_t, 3> c{0, 0, 0};
  for (char ch : word) ++c[static_cast<std::size_t>(ch - '0')];
  return c;
}

std::vector<EnabledMove> enabled_events(const GrammarState& state,
                                        const GrammarSpec& spec) {
  validate(spec);
  check_symbols(state.word);
  std::vector<EnabledMove> out;
  const std::string& w = state.word;
  if (spec.v > 0.0) out.push_back({GrammarRule::drift, -1, spec.v});
  for (std::size_t j = 0; j + 1 < w.size(); ++j) {
    const long long p = static_cast<long long>(j);
    if (spec.lambda0_plus > 0.0 && match_advance(w, j))
      out.push_back({GrammarRule::advance, p, spec.lambda0_plus});
    if (spec.lambda1_plus > 0.0 && match_overtake(w, j))
      out.push_back({GrammarRule::overtake, p, spec.lambda1_plus});
    if (spec.lambda2_minus > 0.0 && match_brake(w, j))
      out.push_back({GrammarRule::brake, p, spec.lambda2_minus});
    if (spec.lambda2_plus > 0.0 && match_accelerate(w, j))
      out.push_back({GrammarRule::accelerate, p, spec.lambda2_plus});
  }
  return out;
}

std::optional<GrammarEvent> step(GrammarState& state, const GrammarSpec& spec,
                                 Rng& rng) {
  const std::vector<EnabledMove> moves = enabled_events(state, spec);
  double total = 0.0;
  for (const EnabledMove& m : moves) total += m.intensity;
  if (total <= 0.0) return std::nullopt;

  const double wait = rng.exponential(total);
  double pick = rng.uniform() * total;
  std::size_t chosen = moves.size() - 1;
  for (std::size_t i = 0; i < moves.size(); ++i) {
    pick -= moves[i].intensity;
    if (pick <= 0.0) {
      chosen = i;
      break;
    }
  }
  const EnabledMove& m = moves[chosen];

#ifndef NDEBUG
  const std::array<std::size_t, 3> before = symbol_counts(state.word);
#endif

  state.t += wait;
  if (m.rule == GrammarRule::drift) {
    state.r += 1;
  } else {
    apply_move(state.word, m.rule, static_cast<std::size_t>(m.pos));
    // rear empty cells carry no cars; dropping them leaves every car's
    // front-anchored coordinate unchanged
    const std::size_t keep = state.word.find_first_not_of('0');
    if (keep != std::string::npos && keep > 0) state.word.erase(0, keep);
  }

#ifndef NDEBUG
  const std::array<std::size_t, 3> after = symbol_counts(state.word);
  assert(before[1] == after[1] && before[2] == after[2]);
  assert(!state.word.empty() && state.word.back() != '0');
#endif

  return GrammarEvent{state.t, m.rule, m.pos};
}

GrammarTrace simulate(const GrammarState& initial, const GrammarSpec& spec,
                      double t_max, std::vector<double> snapshot_times,
                      Rng& rng) {
  validate(spec);
  validate(initial);
  require(t_max > 0.0 && std::isfinite(t_max), "t_max must be positive");

  std::sort(snapshot_times.begin(), snapshot_times.end());
  GrammarTrace trace;
  GrammarState state = initial;
  std::size_t next_snap = 0;
  // records every pending snapshot time below `horizon` against the state
  // in force on that stretch; the chain is right-continuous, so a snapshot
  // exactly at a jump sees the post-jump word via a later flush
  auto flush_before = [&](double horizon, const GrammarState& holding) {
    while (next_snap < snapshot_times.size() &&
           snapshot_times[next_snap] < horizon &&
           snapshot_times[next_snap] <= t_max) {
      const double s = snapshot_times[next_snap];
      ++next_snap;
      if (s < holding.t) continue;
      trace.snapshots.push_back({s, holding.word, holding.r});
    }
  };

  for (;;) {
    GrammarState before = state;
    std::optional<GrammarEvent> ev = step(state, spec, rng);
    if (!ev) {
      trace.absorbed = true;
      break;
    }
    flush_before(std::min(ev->time, t_max), before);
    if (ev->time > t_max) {
      // the drawn jump lands past the horizon; discard it
      state = before;
      break;
    }
    trace.events.push_back(*ev);
  }
  // remaining snapshots up to t_max see the last state reached
  while (next_snap < snapshot_times.size() &&
         snapshot_times[next_snap] <= t_max) {
    const double s = snapshot_times[next_snap];
    ++next_snap;
    if (s < state.t) continue;
    trace.snapshots.push_back({s, state.word, state.r});
  }
  trace.final_state = state;
  return trace;
}

VelocityEstimate relative_velocity_estimate(const GrammarSpec& spec, double rho0,
                                            double rho2, double t_max, Rng& rng) {
  validate(spec);
  require(rho0 >= 0.0 && rho2 >= 0.0, "densities must be >= 0");
  require(rho0 + rho2 <= 1.0 + 1e-12, "densities must sum to at most 1");
  require(t_max > 0.0 && std::isfinite(t_max), "t_max must be positive");

  const double rate = spec.lambda0_plus + spec.lambda1_plus;
  VelocityEstimate out;
  if (rate <= 0.0) return out;

  constexpr std::size_t bins = 100;
  const double bin_w = t_max / static_cast<double>(bins);
  std::vector<double> gain(bins, 0.0);
  double t = 0.0;
  for (;;) {
    t += rng.exponential(rate);
    if (t >= t_max) break;
    const std::size_t b =
        std::min(bins - 1, static_cast<std::size_t>(t / bin_w));
    if (rng.uniform() * rate < spec.lambda0_plus) {
      // advance opportunity: succeeds against a hole ahead
      if (rng.uniform() < rho0) gain[b] += 1.0;
    } else {
      // overtake opportunity: succeeds against a quiet car, gains two cells
      if (rng.uniform() < rho2) gain[b] += 2.0;
    }
  }

  RunningStat stat;
  for (double g : gain) stat.add(g / bin_w);
  out.value = stat.mean;
  out.std_error = stat.stderr_mean();
  return out;
}

bool tasep_mode_check(const GrammarSpec& spec) {
  return spec.lambda0_plus == spec.lambda1_plus && spec.lambda2_minus == 0.0;
}

RingCurrentResult grammar_ring_current(const std::string& word,
                                       const GrammarSpec& spec, double t_max,
                                       Rng& rng) {
  validate(spec);
  check_symbols(word);
  require(word.size() >= 3, "ring needs at least 3 cells");
  require(spec.lambda2_minus == 0.0, "braking would grow the ring");
  require(t_max > 0.0 && std::isfinite(t_max), "t_max must be positive");

  const std::size_t n = word.size();
  std::string w = word;
  auto at = [&](std::size_t i) -> char& { return w[i % n]; };

  struct RingMove {
    GrammarRule rule;
    std::size_t pos;
    double intensity;
  };

  const double burn = 0.1 * t_max;
  constexpr std::size_t bins = 50;
  const double bin_w = (t_max - burn) / static_cast<double>(bins);
  std::vector<double> crossings(bins, 0.0);

  RingCurrentResult out;
  out.final_word = w;
  double t = 0.0;
  std::vector<RingMove> moves;
  for (;;) {
    moves.clear();
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (spec.lambda0_plus > 0.0 && at(j) == '1' && at(j + 1) == '0') {
        moves.push_back({GrammarRule::advance, j, spec.lambda0_plus});
        total += spec.lambda0_plus;
      }
      if (spec.lambda1_plus > 0.0 && at(j) == '1' && at(j + 1) == '2' &&
          at(j + 2) == '0') {
        moves.push_back({GrammarRule::overtake, j, spec.lambda1_plus});
        total += spec.lambda1_plus;
      }
      if (spec.lambda2_plus > 0.0 && at(j) == '2' && at(j + 1) == '0' &&
          at(j + 2) == '0') {
        moves.push_back({GrammarRule::accelerate, j, spec.lambda2_plus});
        total += spec.lambda2_plus;
      }
    }
    if (total <= 0.0) break;  // jammed ring
    t += rng.exponential(total);
    if (t >= t_max) break;
    double pick = rng.uniform() * total;
    std::size_t chosen = moves.size() - 1;
    for (std::size_t i = 0; i < moves.size(); ++i) {
      pick -= moves[i].intensity;
      if (pick <= 0.0) {
        chosen = i;
        break;
      }
    }
    const RingMove& m = moves[chosen];
    std::size_t hop = 0;  // cells gained by the moving car
    switch (m.rule) {
      case GrammarRule::advance:
        at(m.pos) = '0';
        at(m.pos + 1) = '1';
        hop = 1;
        break;
      case GrammarRule::overtake:
        at(m.pos) = '0';
        at(m.pos + 2) = '1';
        hop = 2;
        break;
      case GrammarRule::accelerate:
        at(m.pos) = '0';
        at(m.pos + 1) = '2';
        hop = 1;
        break;
      default:
        break;
    }
    ++out.events;
    // the marked bond is the wrap n-1 -> 0
    if (t >= burn && m.pos + hop >= n) {
      const std::size_t b = std::min(
          bins - 1, static_cast<std::size_t>((t - burn) / bin_w));
      crossings[b] += 1.0;
    }
  }

  RunningStat stat;
  for (double c : crossings) stat.add(c / bin_w);
  out.current = stat.mean;
  out.std_error = stat.stderr_mean();
  out.final_word = w;
  return out;
}

}  // namespace traffic
