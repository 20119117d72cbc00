#pragma once

// Result persistence: CSV rows, JSON summaries and the on-disk cache
// <root>/<scenario_hash>/<command>.csv (root from FOCKMF_CACHE_DIR, else ./cache).

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "fockmf/drivers.hpp"

namespace fockmf {

extern const char* const kCsvHeader;

// wall_ms is written as 0 unless timing is set, so that reruns are bit-identical.
std::string to_csv(const std::string& scenario_hash, const std::vector<ResultRow>& rows, bool timing = false);
std::vector<ResultRow> parse_csv(const std::string& text);

nlohmann::json to_json(const std::string& scenario_hash, const RunResult& result, bool timing = false);

std::filesystem::path cache_root();
std::filesystem::path cache_path(const std::string& scenario_hash, const std::string& command);

std::optional<RunResult> cache_load(const std::string& scenario_hash, const std::string& command);
void cache_store(const std::string& scenario_hash, const RunResult& result);

// Writes <dir>/<command>.<csv|json> and <dir>/<command>.summary.json. Refuses
// empty runs; throws std::runtime_error for unwritable paths.
void emit(const std::filesystem::path& dir, const std::string& scenario_hash, const RunResult& result,
          const std::string& format, bool timing = false);

// Gathers the cached summaries of every command for the scenario.
nlohmann::json build_report(const std::string& scenario_hash);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace fockmf
