#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "trafficlab/grammar_flow.hpp"
#include "trafficlab/stats.hpp"

using namespace traffic;

namespace {

GrammarSpec rates(double l0, double l1, double l2p, double l2m, double v) {
  GrammarSpec s;
  s.lambda0_plus = l0;
  s.lambda1_plus = l1;
  s.lambda2_plus = l2p;
  s.lambda2_minus = l2m;
  s.v = v;
  return s;
}

GrammarState word_at(std::string w, long long r = 0) {
  GrammarState s;
  s.word = std::move(w);
  s.r = r;
  return s;
}

bool has_move(const std::vector<EnabledMove>& moves, GrammarRule rule,
              long long pos) {
  for (const EnabledMove& m : moves)
    if (m.rule == rule && m.pos == pos) return true;
  return false;
}

// One-species exclusion on a ring, written against an occupancy array with
// a uniform pick among movable cars. Counts crossings of the wrap bond.
struct ExclusionRef {
  double current = 0.0;
  double std_error = 0.0;
};

ExclusionRef reference_exclusion(std::vector<int> occ, double rate, double t_max,
                                 Rng& rng) {
  const std::size_t n = occ.size();
  const double burn = 0.1 * t_max;
  constexpr std::size_t bins = 50;
  const double bin_w = (t_max - burn) / static_cast<double>(bins);
  std::vector<double> crossings(bins, 0.0);
  std::vector<std::size_t> movable;
  double t = 0.0;
  for (;;) {
    movable.clear();
    for (std::size_t i = 0; i < n; ++i)
      if (occ[i] == 1 && occ[(i + 1) % n] == 0) movable.push_back(i);
    if (movable.empty()) break;
    t += rng.exponential(rate * static_cast<double>(movable.size()));
    if (t >= t_max) break;
    const std::size_t car = movable[rng.index(movable.size())];
    occ[car] = 0;
    occ[(car + 1) % n] = 1;
    if (t >= burn && car == n - 1) {
      const std::size_t b =
          std::min(bins - 1, static_cast<std::size_t>((t - burn) / bin_w));
      crossings[b] += 1.0;
    }
  }
  RunningStat stat;
  for (double c : crossings) stat.add(c / bin_w);
  return {stat.mean, stat.stderr_mean()};
}

}  // namespace

TEST_CASE("spec and state validation") {
  CHECK_NOTHROW(validate(rates(0, 0, 0, 0, 0)));  // frozen chain is legal
  CHECK_THROWS_AS(validate(rates(-1, 0, 0, 0, 0)), std::invalid_argument);
  CHECK_THROWS_AS(validate(rates(0, 0, 0, 0, -0.5)), std::invalid_argument);

  CHECK_NOTHROW(validate(word_at("1")));
  CHECK_NOTHROW(validate(word_at("21")));
  CHECK_THROWS_AS(validate(word_at("")), std::invalid_argument);
  CHECK_THROWS_AS(validate(word_at("13")), std::invalid_argument);
  CHECK_THROWS_AS(validate(word_at("10")), std::invalid_argument);  // front empty
}

TEST_CASE("enabled moves enumeration") {
  GrammarSpec all = rates(1, 1, 1, 1, 1);

  std::vector<EnabledMove> lone = enabled_events(word_at("1"), all);
  REQUIRE(lone.size() == 1);
  CHECK(lone[0].rule == GrammarRule::drift);
  CHECK(lone[0].pos == -1);
  CHECK(lone[0].intensity == 1.0);

  std::vector<EnabledMove> adv = enabled_events(word_at("101"), all);
  REQUIRE(adv.size() == 2);
  CHECK(has_move(adv, GrammarRule::drift, -1));
  CHECK(has_move(adv, GrammarRule::advance, 0));

  std::vector<EnabledMove> ovt = enabled_events(word_at("1201"), all);
  REQUIRE(ovt.size() == 2);
  CHECK(has_move(ovt, GrammarRule::overtake, 0));

  std::vector<EnabledMove> brk = enabled_events(word_at("22"), all);
  REQUIRE(brk.size() == 2);
  CHECK(has_move(brk, GrammarRule::brake, 0));
  CHECK(has_move(enabled_events(word_at("21"), all), GrammarRule::brake, 0));

  std::vector<EnabledMove> acc = enabled_events(word_at("2001"), all);
  REQUIRE(acc.size() == 2);
  CHECK(has_move(acc, GrammarRule::accelerate, 0));

  // zero-intensity rules never enter the menu
  GrammarSpec drift_only = rates(0, 0, 0, 0, 2.0);
  std::vector<EnabledMove> only = enabled_events(word_at("101"), drift_only);
  REQUIRE(only.size() == 1);
  CHECK(only[0].rule == GrammarRule::drift);
  CHECK(only[0].intensity == 2.0);
}

TEST_CASE("single steps apply the literal rewrites") {
  Rng rng(11);

  GrammarState s = word_at("101", 5);
  auto ev = step(s, rates(1, 0, 0, 0, 0), rng);
  REQUIRE(ev.has_value());
  CHECK(ev->rule == GrammarRule::advance);
  CHECK(ev->pos == 0);
  CHECK(s.word == "11");  // rear cell emptied and dropped
  CHECK(s.r == 5);
  CHECK(s.t == ev->time);
  CHECK(ev->time > 0.0);

  GrammarState brake = word_at("22", 3);
  auto evb = step(brake, rates(0, 0, 0, 1, 0), rng);
  REQUIRE(evb.has_value());
  CHECK(evb->rule == GrammarRule::brake);
  CHECK(brake.word == "202");
  CHECK(brake.r == 3);

  GrammarState acc = word_at("2001", 7);
  auto eva = step(acc, rates(0, 0, 1, 0, 0), rng);
  REQUIRE(eva.has_value());
  CHECK(eva->rule == GrammarRule::accelerate);
  CHECK(acc.word == "201");  // rear cell emptied and dropped
  CHECK(acc.r == 7);

  GrammarState ovt = word_at("1201", 2);
  auto evo = step(ovt, rates(0, 1, 0, 0, 0), rng);
  REQUIRE(evo.has_value());
  CHECK(evo->rule == GrammarRule::overtake);
  CHECK(ovt.word == "211");
  CHECK(ovt.r == 2);

  GrammarState drift = word_at("121", 0);
  auto evd = step(drift, rates(0, 0, 0, 0, 2), rng);
  REQUIRE(evd.has_value());
  CHECK(evd->rule == GrammarRule::drift);
  CHECK(evd->pos == -1);
  CHECK(drift.word == "121");
  CHECK(drift.r == 1);

  // no matching pattern and no drift: absorbed, state untouched
  GrammarState stuck = word_at("1", 4);
  auto none = step(stuck, rates(1, 1, 1, 1, 0), rng);
  CHECK(!none.has_value());
  CHECK(stuck.word == "1");
  CHECK(stuck.t == 0.0);
}

TEST_CASE("trajectories conserve cars and stay front-anchored") {
  GrammarSpec spec = rates(1, 1, 1, 1, 0.5);
  GrammarState init = word_at("1210201211", 9);
  Rng rng(20260815);
  GrammarTrace trace =
      simulate(init, spec, 50.0, {0.0, 10.0, 20.0, 30.0, 40.0, 50.0}, rng);

  CHECK(!trace.absorbed);
  CHECK(trace.events.size() > 20);
  const auto init_counts = symbol_counts(init.word);
  REQUIRE(trace.snapshots.size() == 6);
  for (const GrammarSnapshot& snap : trace.snapshots) {
    const auto c = symbol_counts(snap.word);
    CHECK(c[1] == init_counts[1]);
    CHECK(c[2] == init_counts[2]);
    CHECK(snap.word.back() != '0');
  }
  const auto final_counts = symbol_counts(trace.final_state.word);
  CHECK(final_counts[1] == init_counts[1]);
  CHECK(final_counts[2] == init_counts[2]);

  double prev = 0.0;
  for (const GrammarEvent& ev : trace.events) {
    CHECK(ev.time > prev);
    prev = ev.time;
  }
  CHECK(prev <= 50.0);

  // quiet convoy with braking off: nothing can rewrite the word
  GrammarState convoy = word_at("222", 0);
  Rng rng2(7);
  GrammarTrace still =
      simulate(convoy, rates(1, 1, 1, 0, 1), 20.0, {20.0}, rng2);
  CHECK(still.final_state.word == "222");
  for (const GrammarEvent& ev : still.events)
    CHECK(ev.rule == GrammarRule::drift);
  CHECK(still.final_state.r > 0);

  // frozen spec: legal, immediately absorbed
  Rng rng3(8);
  GrammarTrace frozen =
      simulate(word_at("121"), rates(0, 0, 0, 0, 0), 5.0, {1.0, 4.0}, rng3);
  CHECK(frozen.absorbed);
  CHECK(frozen.events.empty());
  REQUIRE(frozen.snapshots.size() == 2);
  CHECK(frozen.snapshots[0].word == "121");
  CHECK(frozen.snapshots[1].word == "121");

  // absorbing word under a live spec
  Rng rng4(9);
  GrammarTrace dead = simulate(word_at("1"), rates(1, 0, 0, 0, 0), 5.0, {}, rng4);
  CHECK(dead.absorbed);
  CHECK(dead.events.empty());
  CHECK(dead.final_state.word == "1");
}

TEST_CASE("relative velocity against the thinned-drift formula") {
  // lambda0 * rho0 + 2 * lambda1 * rho2
  Rng r1(101);
  VelocityEstimate clear =
      relative_velocity_estimate(rates(1, 0.7, 0, 0, 0), 1.0, 0.0, 20000.0, r1);
  CHECK(clear.std_error > 0.0);
  CHECK(std::abs(clear.value - 1.0) < 3.0 * clear.std_error);

  Rng r2(102);
  VelocityEstimate ovt =
      relative_velocity_estimate(rates(0, 1, 0, 0, 0), 0.5, 0.5, 20000.0, r2);
  CHECK(std::abs(ovt.value - 1.0) < 0.05);

  Rng r3(103);
  VelocityEstimate mix =
      relative_velocity_estimate(rates(1, 1, 0, 0, 0), 0.5, 0.25, 20000.0, r3);
  CHECK(std::abs(mix.value - 1.0) < 0.05);

  Rng r4(104);
  CHECK_THROWS_AS(
      relative_velocity_estimate(rates(1, 1, 0, 0, 0), 0.7, 0.5, 10.0, r4),
      std::invalid_argument);
  Rng r5(105);
  VelocityEstimate idle =
      relative_velocity_estimate(rates(0, 0, 1, 1, 0), 0.5, 0.5, 10.0, r5);
  CHECK(idle.value == 0.0);
}

TEST_CASE("exclusion degeneration flag") {
  CHECK(tasep_mode_check(rates(1, 1, 0.3, 0, 0)));
  CHECK(tasep_mode_check(rates(1, 1, 0, 0, 2)));
  CHECK(!tasep_mode_check(rates(1, 2, 0, 0, 0)));
  CHECK(!tasep_mode_check(rates(1, 1, 0, 0.1, 0)));
}

TEST_CASE("ring current matches a one-species exclusion reference") {
  const std::size_t n = 20;
  std::string word;
  std::vector<int> occ;
  for (std::size_t i = 0; i < n; ++i) {
    const bool car = (i % 2 == 0);  // 10 cars on 20 cells
    word.push_back(car ? '1' : '0');
    occ.push_back(car ? 1 : 0);
  }
  GrammarSpec spec = rates(1, 1, 0, 0, 0);
  REQUIRE(tasep_mode_check(spec));

  Rng rg(31415);
  RingCurrentResult ring = grammar_ring_current(word, spec, 20000.0, rg);
  Rng rr(27182);
  ExclusionRef ref = reference_exclusion(occ, 1.0, 20000.0, rr);

  // stationary bond current k(n-k)/(n(n-1)) under the uniform law
  const double exact = 10.0 * 10.0 / (20.0 * 19.0);
  CHECK(std::abs(ring.current - exact) < 3.0 * ring.std_error);
  CHECK(std::abs(ref.current - exact) < 3.0 * ref.std_error);
  const double joint =
      std::sqrt(ring.std_error * ring.std_error + ref.std_error * ref.std_error);
  CHECK(std::abs(ring.current - ref.current) < 3.0 * joint);

  const auto counts = symbol_counts(ring.final_word);
  CHECK(counts[1] == 10);
  CHECK(ring.final_word.size() == n);

  // fully packed ring cannot move
  Rng rj(1);
  RingCurrentResult jam = grammar_ring_current("111", spec, 10.0, rj);
  CHECK(jam.current == 0.0);
  CHECK(jam.events == 0);

  Rng rb(2);
  CHECK_THROWS_AS(grammar_ring_current("10", spec, 10.0, rb),
                  std::invalid_argument);
  Rng rc(3);
  CHECK_THROWS_AS(grammar_ring_current("100", rates(1, 1, 0, 0.5, 0), 10.0, rc),
                  std::invalid_argument);

  Rng ra1(42), ra2(42);
  RingCurrentResult d1 = grammar_ring_current(word, spec, 500.0, ra1);
  RingCurrentResult d2 = grammar_ring_current(word, spec, 500.0, ra2);
  CHECK(d1.current == d2.current);
  CHECK(d1.events == d2.events);
  CHECK(d1.final_word == d2.final_word);
}
