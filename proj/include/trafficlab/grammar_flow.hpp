#pragma once
#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "trafficlab/rng.hpp"

namespace traffic {

// Substitution rules on words over {0,1,2}: 0 empty cell, 1 fast car,
// 2 quiet car. Cells are written rear to front; the front symbol is the
// last character and cars advance toward the front.
//   advance    "10"  -> "01"          rate lambda0_plus
//   overtake   "120" -> "021"         rate lambda1_plus
//   brake      "22"  -> "202",
//              "21"  -> "201"         rate lambda2_minus (inserts a cell)
//   accelerate "200" -> "020"         rate lambda2_plus
//   drift      whole group forward    rate v
enum class GrammarRule : int {
  drift = 0,
  advance = 1,
  overtake = 2,
  brake = 3,
  accelerate = 4,
};

struct GrammarSpec {
  double lambda0_plus = 0.0;
  double lambda1_plus = 0.0;
  double lambda2_plus = 0.0;
  double lambda2_minus = 0.0;
  double v = 0.0;
};

// Nonnegative intensities. An all-zero spec is legal and freezes the chain.
void validate(const GrammarSpec& spec);

struct GrammarState {
  std::string word;  // rear to front; word.back() is the front symbol
  long long r = 0;   // coordinate of the front symbol
  double t = 0.0;
};

// word nonempty, symbols in {0,1,2}, front symbol nonzero. The symbol k
// places from the front sits at coordinate r - k.
void validate(const GrammarState& state);

struct EnabledMove {
  GrammarRule rule = GrammarRule::drift;
  long long pos = -1;  // match start in the word; -1 for drift
  double intensity = 0.0;
};

struct GrammarEvent {
  double time = 0.0;
  GrammarRule rule = GrammarRule::drift;
  long long pos = -1;
};

// counts[d] = occurrences of digit d in the word
std::array<std::size_t, 3> symbol_counts(const std::string& word);

// Every positive-intensity match of the four patterns plus the drift move.
// Mechanical scan; does not require a valid front symbol.
std::vector<EnabledMove> enabled_events(const GrammarState& state,
                                        const GrammarSpec& spec);

// One jump of the chain: exponential wait at the total intensity, move
// chosen proportionally, substitution applied, rear zeros trimmed (the
// front coordinate r never moves when the rear is trimmed). Returns empty
// when no move is enabled; the state is then absorbed and left unchanged.
std::optional<GrammarEvent> step(GrammarState& state, const GrammarSpec& spec,
                                 Rng& rng);

struct GrammarSnapshot {
  double t = 0.0;
  std::string word;
  long long r = 0;
};

struct GrammarTrace {
  std::vector<GrammarEvent> events;
  std::vector<GrammarSnapshot> snapshots;
  GrammarState final_state;
  bool absorbed = false;
};

// Run until t_max; snapshot_times outside [0, t_max] are ignored. Car
// counts (symbols 1 and 2) are conserved by every rule.
GrammarTrace simulate(const GrammarState& initial, const GrammarSpec& spec,
                      double t_max, std::vector<double> snapshot_times, Rng& rng);

struct VelocityEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

// Drift of one fast car through an annealed background of holes (density
// rho0) and quiet cars (density rho2): advance opportunities arrive at
// rate lambda0_plus and succeed against a hole, overtake opportunities at
// rate lambda1_plus succeed against a quiet car and gain two cells.
// Std-error from independent time bins.
VelocityEstimate relative_velocity_estimate(const GrammarSpec& spec, double rho0,
                                            double rho2, double t_max, Rng& rng);

// True iff the dynamics degenerates to the single-species exclusion chain:
// equal advance and overtake rates and no braking.
bool tasep_mode_check(const GrammarSpec& spec);

struct RingCurrentResult {
  double current = 0.0;    // car crossings of the marked bond per unit time
  double std_error = 0.0;  // from time bins after burn-in
  std::size_t events = 0;
  std::string final_word;
};

// Same rules on a fixed ring of cells (indices cyclic, no drift, no rear
// trimming). Braking is rejected: it would grow the ring. The marked bond
// is the wrap from the last cell to cell 0; the first tenth of t_max is
// discarded as burn-in.
RingCurrentResult grammar_ring_current(const std::string& word,
                                       const GrammarSpec& spec, double t_max,
                                       Rng& rng);

}  // namespace traffic
