#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

namespace nullforge {

struct ExperimentOutcome {
  bool certified = false;
  nlohmann::json certificate;              // certificate.json
  std::string sweep_csv;                   // sweep.csv
  std::vector<std::string> summary_lines;  // summary.txt
  std::vector<std::pair<std::string, std::string>> extra_files;  // e.g. T-matrix dumps
};

struct ExperimentInfo {
  std::string name;
  std::string anchor;           // which statement the run certifies
  double expected_runtime_s;    // rough, commodity hardware
  std::function<ExperimentOutcome(const nlohmann::json&)> fn;
};

const std::vector<ExperimentInfo>& experiment_registry();
const ExperimentInfo* find_experiment(const std::string& name);

// name -> formatted listing (one line per experiment)
std::string list_experiments_table();

// Runs one experiment and writes certificate.json, sweep.csv, summary.txt.
// Returns 0 when every certified property passed, 1 otherwise. Configs must
// carry an explicit "seed"; outputs are byte-identical given (config, seed).
int run_experiment(const std::string& name, const nlohmann::json& config,
                   const std::filesystem::path& out_dir);

nlohmann::json default_config(const std::string& name);

}  // namespace nullforge
