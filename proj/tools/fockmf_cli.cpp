// fockmf <converge|dyson|bounds|transport|report> --scenario <path> [--out <dir>]
//        [--format csv|json] [--slice <dt>] [--jobs <k>] [--timing] [--no-cache]

#include <cstdio>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "fockmf/emit.hpp"

namespace {

nlohmann::json read_document(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error("scenario " + path + " is not valid JSON: " + e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fock space mean-field experiments"};
  std::string command, scenario_path, out_dir = ".", format = "csv";
  double slice = 0.0;
  int jobs = 1;
  bool timing = false, no_cache = false;
  app.add_option("command", command, "converge | dyson | bounds | transport | report")
      ->required()
      ->check(CLI::IsMember({"converge", "dyson", "bounds", "transport", "report"}));
  app.add_option("--scenario", scenario_path, "scenario JSON file")->required()->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--slice", slice, "compose the flow from pieces of at most this length")
      ->check(CLI::PositiveNumber);
  app.add_option("--jobs", jobs, "worker threads")->check(CLI::Range(1, 1024));
  app.add_flag("--timing", timing, "record wall_ms (disables the cache)");
  app.add_flag("--no-cache", no_cache, "always recompute");
  CLI11_PARSE(app, argc, argv);

  try {
    nlohmann::json doc = read_document(scenario_path);
    if (slice > 0.0 && doc.is_object()) doc["slice"] = slice;
    const fockmf::Scenario s = fockmf::parse_scenario(doc);

    if (command == "report") {
      const auto report = fockmf::build_report(s.hash);
      fockmf::write_text(std::filesystem::path(out_dir) / "report.json", report.dump(2) + "\n");
      std::printf("report for %s written to %s\n", s.hash.c_str(), out_dir.c_str());
      return 0;
    }

    const bool use_cache = !no_cache && !timing;
    std::optional<fockmf::RunResult> result;
    if (use_cache) result = fockmf::cache_load(s.hash, command);
    if (!result) {
      result = fockmf::run_command(command, s, fockmf::RunOptions{jobs});
      result->summary["cache_hit"] = false;
      if (!result->rows.empty() && !timing) fockmf::cache_store(s.hash, *result);
    }
    fockmf::emit(out_dir, s.hash, *result, format, timing);
    const auto& failures = result->summary["failures"];
    std::printf("%s: %zu rows, scenario %s%s\n", command.c_str(), result->rows.size(), s.hash.c_str(),
                result->summary["cache_hit"].get<bool>() ? " (cached)" : "");
    if (!failures.empty()) {
      std::fprintf(stderr, "%zu failed tasks, see %s.summary.json\n", failures.size(), command.c_str());
      return 3;
    }
    return 0;
  } catch (const fockmf::ScenarioError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
