#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "nullforge/experiments.hpp"

// Exit codes: 0 all certified properties pass, 1 certification failure,
// 2 usage or configuration error.
int main(int argc, char** argv) {
  CLI::App app{"degeneracy certificates for neural variational discretizations"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run a named experiment");
  std::string name, config_path, out_dir;
  long long seed_override = -1;
  run->add_option("name", name, "experiment name (see `forge list`)")->required();
  run->add_option("--config", config_path, "JSON config path (defaults ship in configs/)");
  run->add_option("--out", out_dir, "output directory")->required();
  run->add_option("--seed", seed_override, "override the config seed");

  auto* list = app.add_subcommand("list", "list experiments with anchors and runtimes");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (list->parsed()) {
      std::cout << nullforge::list_experiments_table();
      return 0;
    }
    if (!nullforge::find_experiment(name)) {
      std::cerr << "unknown experiment: " << name << "\n" << nullforge::list_experiments_table();
      return 2;
    }
    nlohmann::json config;
    if (!config_path.empty()) {
      std::ifstream f(config_path);
      if (!f) {
        std::cerr << "cannot open config: " << config_path << "\n";
        return 2;
      }
      try {
        f >> config;
      } catch (const std::exception& e) {
        std::cerr << "unparseable config: " << e.what() << "\n";
        return 2;
      }
    } else {
      config = nullforge::default_config(name);
    }
    if (seed_override >= 0) config["seed"] = static_cast<std::uint64_t>(seed_override);
    if (!config.contains("seed")) {
      std::cerr << "config must carry an explicit \"seed\"\n";
      return 2;
    }

    const int rc = nullforge::run_experiment(name, config, out_dir);
    if (rc == 0)
      std::cout << name << ": PASS (" << out_dir << ")\n";
    else
      std::cerr << name << ": FAIL — see " << out_dir << "/summary.txt\n";
    return rc;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
