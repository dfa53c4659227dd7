#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "trafficlab/harness.hpp"

namespace {

int list_experiments() {
  for (const auto& info : traffic::experiment_catalog())
    std::printf("%-16s %s\n", info.id.c_str(), info.summary.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stochastic traffic flow laboratory"};
  std::string experiment;
  std::string config_path;
  std::string out_path;
  traffic::ExperimentConfig config;
  app.add_option("experiment", experiment,
                 "experiment id, or 'list' for the catalog")
      ->required();
  app.add_option("--config", config_path, "flat key = value config file");
  app.add_option("--seed", config.seed, "master seed (default 1)");
  app.add_option("--replicas", config.replicas, "replica count (default 1)");
  app.add_option("--out", out_path, "output file (default stdout)");
  app.add_option("--format", config.format, "csv or json (default csv)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  if (experiment == "list") return list_experiments();

  try {
    if (config_path.empty())
      throw std::invalid_argument("--config is required for an experiment run");
    std::ifstream in(config_path);
    if (!in) throw std::invalid_argument("cannot read config file '" + config_path + "'");
    config.experiment = experiment;
    config.params = traffic::parse_flat_config(in);

    traffic::RunReport report = traffic::run_experiment(config);
    const std::string rendered = config.format == "json"
                                     ? traffic::render_json(report)
                                     : traffic::render_csv(report);
    if (out_path.empty()) {
      std::cout << rendered;
    } else {
      std::ofstream out(out_path, std::ios::binary);
      if (!out) throw std::invalid_argument("cannot write output file '" + out_path + "'");
      out << rendered;
    }
    return report.tolerance_ok ? 0 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
