#pragma once
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace traffic {

// One experiment invocation: id, flat key-value parameters, replication.
// format selects the renderer only; it never changes what is computed.
struct ExperimentConfig {
  std::string experiment;
  std::map<std::string, std::string> params;
  std::uint64_t seed = 1;
  std::size_t replicas = 1;
  std::string format = "csv";
};

// One scalar metric across the replicas. analytic is the closed-form
// reference when the experiment has one (NaN otherwise); a metric is
// checked when a reference and at least one tolerance are declared, and
// passes when |mean - analytic| <= max(rel*|analytic|, abs, 3*std_error).
struct MetricAggregate {
  std::string name;
  std::vector<double> values;  // per replica, fixed order
  double mean = 0.0;
  double std_error = 0.0;
  double analytic = 0.0;
  double rel_tolerance = 0.0;
  double abs_tolerance = 0.0;
  bool checked = false;
  bool pass = true;
};

struct RunReport {
  ExperimentConfig config;
  std::vector<MetricAggregate> metrics;
  bool tolerance_ok = true;  // every checked metric passed
  std::string config_hash;   // 16 hex digits
};

struct ExperimentInfo {
  std::string id;
  std::string summary;
  std::string minimal_config;  // smallest config text that runs green
};

// The eleven experiments, fixed order. Every minimal_config round-trips
// through the schema and passes its own declared tolerances.
const std::vector<ExperimentInfo>& experiment_catalog();

// key = value per line, '#' comments and blank lines skipped. Throws
// std::invalid_argument on malformed lines and duplicate keys.
std::map<std::string, std::string> parse_flat_config(std::istream& in);
std::map<std::string, std::string> parse_flat_config_text(const std::string& text);

// Canonical hash of (experiment, params, seed, replicas, format).
std::string config_hash(const ExperimentConfig& config);

// Validates the config against the experiment schema (unknown experiment or
// key, missing or ill-typed value all throw std::invalid_argument naming the
// field), then runs the replicas with seeds derive_seed(seed, replica) in
// fixed order. Identical configs give identical reports.
RunReport run_experiment(const ExperimentConfig& config);

// Renderers are pure functions of the report; reruns are byte-identical.
// CSV: header row, one row per replica, aggregate comment lines, trailing
// config-hash comment. JSON: analytic and empirical side by side.
std::string render_csv(const RunReport& report);
std::string render_json(const RunReport& report);

}  // namespace traffic
