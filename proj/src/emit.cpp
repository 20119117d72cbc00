#include "fockmf/emit.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fockmf {

namespace fs = std::filesystem;
using nlohmann::json;

const char* const kCsvHeader =
    "scenario_hash,command,epsilon,t,observable,lhs_re,lhs_im,rhs_re,rhs_im,abs_error,envelope_A,envelope_B,"
    "envelope_C,wall_ms";

namespace {

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

json num(double x) {
  if (std::isfinite(x)) return x;
  return fmt(x);
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

double to_double(const std::string& s) {
  char* end = nullptr;
  const double x = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') throw std::runtime_error("bad number in csv: " + s);
  return x;
}

fs::path summary_path(const fs::path& csv) {
  fs::path p = csv;
  p.replace_extension(".summary.json");
  return p;
}

}  // namespace

void write_text(const fs::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  out.flush();
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::string to_csv(const std::string& scenario_hash, const std::vector<ResultRow>& rows, bool timing) {
  std::string out = kCsvHeader;
  out += '\n';
  for (const auto& r : rows) {
    const double cols[] = {r.lhs.real(), r.lhs.imag(), r.rhs.real(), r.rhs.imag(), r.abs_error,
                           r.envelope_a, r.envelope_b, r.envelope_c, timing ? r.wall_ms : 0.0};
    out += scenario_hash + ',' + r.command + ',' + fmt(r.epsilon) + ',' + fmt(r.t) + ',' + r.observable;
    for (double c : cols) out += ',' + fmt(c);
    out += '\n';
  }
  return out;
}

std::vector<ResultRow> parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw std::runtime_error("csv header mismatch");
  std::vector<ResultRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 14) throw std::runtime_error("csv row has " + std::to_string(f.size()) + " fields");
    ResultRow r;
    r.command = f[1];
    r.epsilon = to_double(f[2]);
    r.t = to_double(f[3]);
    r.observable = f[4];
    r.lhs = cplx(to_double(f[5]), to_double(f[6]));
    r.rhs = cplx(to_double(f[7]), to_double(f[8]));
    r.abs_error = to_double(f[9]);
    r.envelope_a = to_double(f[10]);
    r.envelope_b = to_double(f[11]);
    r.envelope_c = to_double(f[12]);
    r.wall_ms = to_double(f[13]);
    rows.push_back(r);
  }
  return rows;
}

json to_json(const std::string& scenario_hash, const RunResult& result, bool timing) {
  json rows = json::array();
  for (const auto& r : result.rows) {
    rows.push_back({{"scenario_hash", scenario_hash},
                    {"command", r.command},
                    {"epsilon", num(r.epsilon)},
                    {"t", num(r.t)},
                    {"observable", r.observable},
                    {"lhs", {num(r.lhs.real()), num(r.lhs.imag())}},
                    {"rhs", {num(r.rhs.real()), num(r.rhs.imag())}},
                    {"abs_error", num(r.abs_error)},
                    {"envelope_A", num(r.envelope_a)},
                    {"envelope_B", num(r.envelope_b)},
                    {"envelope_C", num(r.envelope_c)},
                    {"wall_ms", timing ? r.wall_ms : 0.0}});
  }
  return {{"summary", result.summary}, {"rows", rows}};
}

fs::path cache_root() {
  if (const char* env = std::getenv("FOCKMF_CACHE_DIR"); env != nullptr && *env != '\0') return env;
  return "cache";
}

fs::path cache_path(const std::string& scenario_hash, const std::string& command) {
  return cache_root() / scenario_hash / (command + ".csv");
}

std::optional<RunResult> cache_load(const std::string& scenario_hash, const std::string& command) {
  const fs::path csv = cache_path(scenario_hash, command);
  const fs::path sum = summary_path(csv);
  if (!fs::exists(csv) || !fs::exists(sum)) return std::nullopt;
  try {
    RunResult r;
    r.command = command;
    r.rows = parse_csv(read_text(csv));
    r.summary = json::parse(read_text(sum));
    r.summary["cache_hit"] = true;
    return r;
  } catch (const std::exception&) {
    return std::nullopt;  // damaged entry: recompute
  }
}

void cache_store(const std::string& scenario_hash, const RunResult& result) {
  const fs::path csv = cache_path(scenario_hash, result.command);
  json summary = result.summary;
  summary.erase("cache_hit");
  write_text(csv, to_csv(scenario_hash, result.rows));
  write_text(summary_path(csv), summary.dump(2) + "\n");
}

void emit(const fs::path& dir, const std::string& scenario_hash, const RunResult& result, const std::string& format,
          bool timing) {
  if (result.rows.empty()) throw std::invalid_argument("refusing to emit an empty run (" + result.command + ")");
  if (format == "csv") {
    write_text(dir / (result.command + ".csv"), to_csv(scenario_hash, result.rows, timing));
  } else if (format == "json") {
    write_text(dir / (result.command + ".json"), to_json(scenario_hash, result, timing).dump(2) + "\n");
  } else {
    throw std::invalid_argument("unknown format \"" + format + "\"");
  }
  write_text(dir / (result.command + ".summary.json"), result.summary.dump(2) + "\n");
}

json build_report(const std::string& scenario_hash) {
  json report = {{"scenario_hash", scenario_hash}, {"commands", json::object()}};
  for (const char* command : {"converge", "dyson", "bounds", "transport"}) {
    const auto cached = cache_load(scenario_hash, command);
    if (!cached) continue;
    json entry = cached->summary;
    entry.erase("cache_hit");
    entry["rows"] = cached->rows.size();
    report["commands"][command] = entry;
  }
  if (report["commands"].empty()) {
    throw std::runtime_error("no cached results for scenario " + scenario_hash + " under " + cache_root().string());
  }
  return report;
}

}  // namespace fockmf
