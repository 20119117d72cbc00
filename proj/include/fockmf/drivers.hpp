#pragma once

// Experiment drivers over a scenario grid. Rows are computed by a worker pool
// and returned in canonical order (eps, then t, then observable).

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "fockmf/scenario.hpp"

namespace fockmf {

struct ResultRow {
  std::string command;
  double epsilon = 0.0;
  double t = 0.0;
  std::string observable;
  cplx lhs;
  cplx rhs;
  double abs_error = 0.0;
  double envelope_a = 0.0;
  double envelope_b = 0.0;
  double envelope_c = 0.0;
  double wall_ms = 0.0;
};

struct RunOptions {
  int jobs = 1;
};

struct RunResult {
  std::string command;
  std::vector<ResultRow> rows;
  nlohmann::json summary;
};

// Runs f(0), ..., f(n-1) on up to jobs threads.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& f);

// lhs = Tr[rho_eps(t) b^Wick], rhs = int b d(mu o F_{-t}). Throws
// std::invalid_argument for |t| >= T_0 unless the scenario slices the flow.
RunResult run_converge(const Scenario& s, const RunOptions& opt = {});

// Classical rows ("dyson"): partial sums against the flow, observable
// "label|M=k", eps = 0. Quantum rows ("dyson_quantum"): Heisenberg expectation
// against sum_{m <= M} i^m int Tr[rho (C_0^(m))^Wick].
RunResult run_dyson(const Scenario& s, const RunOptions& opt = {});

// Seeded random instances for the C^(m)_r norm bound.
struct BoundInstance {
  int d = 1, p = 0, q = 0, m = 0, r = 0;
  double t = 0.0;
  double norm = 0.0;
  double bound = 0.0;
};
std::vector<BoundInstance> bound_instances(std::uint64_t seed, int count);
RunResult run_bounds(const Scenario& s, const RunOptions& opt = {});

RunResult run_transport(const Scenario& s, const RunOptions& opt = {});

RunResult run_command(const std::string& command, const Scenario& s, const RunOptions& opt = {});

}  // namespace fockmf
