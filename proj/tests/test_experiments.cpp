#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "nullforge/experiments.hpp"

using namespace nullforge;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("nullforge_test_" + tag);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("registry lists all twelve experiments with anchors") {
  CHECK(experiment_registry().size() == 12);
  const std::string table = list_experiments_table();
  CHECK(table.find("dr-nonuniqueness → Theorem (the set of minimizers is infinite)") !=
        std::string::npos);
  int lines = 0;
  for (char c : table)
    if (c == '\n') ++lines;
  CHECK(lines == 12);
}

TEST_CASE("unknown experiment and missing seed are usage errors") {
  CHECK(find_experiment("no-such") == nullptr);
  CHECK_THROWS_AS(run_experiment("no-such", nlohmann::json{{"seed", 1}}, fresh_dir("x")),
                  std::invalid_argument);
  CHECK_THROWS_AS(run_experiment("dr-affine", nlohmann::json::object(), fresh_dir("y")),
                  std::invalid_argument);
}

TEST_CASE("every experiment runs green on its default config") {
  for (const auto& info : experiment_registry()) {
    CAPTURE(info.name);
    const fs::path dir = fresh_dir(info.name);
    const int rc = run_experiment(info.name, default_config(info.name), dir);
    CHECK(rc == 0);
    CHECK(fs::exists(dir / "certificate.json"));
    CHECK(fs::exists(dir / "sweep.csv"));
    CHECK(fs::exists(dir / "summary.txt"));
    const std::string summary = slurp(dir / "summary.txt");
    CHECK(summary.find("PASS") != std::string::npos);
    fs::remove_all(dir);
  }
}

TEST_CASE("identical config and seed give byte-identical certificates") {
  const fs::path a = fresh_dir("det_a"), b = fresh_dir("det_b");
  const auto cfg = default_config("dr-nonuniqueness");
  REQUIRE(run_experiment("dr-nonuniqueness", cfg, a) == 0);
  REQUIRE(run_experiment("dr-nonuniqueness", cfg, b) == 0);
  CHECK(slurp(a / "certificate.json") == slurp(b / "certificate.json"));
  CHECK(slurp(a / "sweep.csv") == slurp(b / "sweep.csv"));
  fs::remove_all(a);
  fs::remove_all(b);
}
