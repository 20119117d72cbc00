#include "fockmf/drivers.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <memory>
#include <mutex>
#include <thread>

#include "fockmf/random.hpp"

namespace fockmf {

using nlohmann::json;

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& f) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, jobs)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          f(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

json number(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

json order_json(const OrderFit& fit) { return fit.exact ? json("exact") : number(fit.order); }

bool slicing(const Scenario& s) { return std::isfinite(s.slice); }

json base_summary(const Scenario& s, const std::string& command) {
  json j;
  j["scenario_hash"] = s.hash;
  j["command"] = command;
  j["lambda"] = number(scenario_lambda(s));
  j["T0"] = number(scenario_t0(s));
  j["tolerances"] = {{"ode_tol", s.tol.ode_tol}, {"quad_tol", s.tol.quad_tol}, {"tail_tol", s.tol.tail_tol}};
  j["slice"] = slicing(s) ? json(s.slice) : json(nullptr);
  j["seed"] = s.seed;
  j["failures"] = json::array();
  return j;
}

// Per-eps (H0) audit of the actual states.
json lambda_audit(const std::vector<double>& eps, const std::vector<DensityState>& states) {
  json audit = json::array();
  for (std::size_t i = 0; i < eps.size(); ++i) {
    audit.push_back({{"epsilon", eps[i]}, {"h0_lambda", h0_lambda(states[i], 6)}});
  }
  return audit;
}

void check_times(const Scenario& s) {
  const double t0 = scenario_t0(s);
  if (slicing(s) && !(s.slice < t0)) {
    throw std::invalid_argument("slice " + std::to_string(s.slice) + " must be below T0 = " + std::to_string(t0));
  }
  if (slicing(s)) return;
  for (double t : s.times) {
    if (std::abs(t) >= t0) {
      throw std::invalid_argument("time " + std::to_string(t) + " is not below T0 = " + std::to_string(t0) +
                                  "; enable slicing with --slice");
    }
  }
}

int classical_order(const Scenario& s) {
  return HermitianExp(s.a).is_zero() ? s.dyson_m_max : std::min(s.dyson_m_max, kMaxQuadratureOrder);
}

std::vector<DensityState> build_states(const Scenario& s, int jobs) {
  std::vector<DensityState> states(s.epsilons.size());
  parallel_for(states.size(), jobs, [&](std::size_t i) { states[i] = make_state(s, s.epsilons[i]); });
  return states;
}

ResultRow failed_row(const std::string& command, double eps, double t, const std::string& label) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  return {command, eps, t, label, cplx(nan, nan), cplx(nan, nan), nan, nan, nan, nan, 0.0};
}

void record_failure(json& summary, double eps, double t, const std::string& what) {
  summary["failures"].push_back({{"epsilon", eps}, {"t", t}, {"error", what}});
}

// Sum of A_m for m in (k, k + 40], plus the geometric majorant beyond.
double envelope_tail(const PolySymbol& b, const PolySymbol& q, double lambda, double t, int k) {
  const int last = k + 40;
  const Envelopes env = envelopes(b, q, lambda, 0.0, t, last);
  double s = 0.0;
  for (int m = k + 1; m <= last; ++m) s += env.a[static_cast<std::size_t>(m)];
  const double ratio = 8.0 * lambda * std::abs(t) * op_norm(q.kernel());
  if (ratio >= 1.0) return std::numeric_limits<double>::infinity();
  const double scale = std::pow(lambda, 0.5 * (b.p() + b.q()));
  return s + scale * geometric_majorant(b, q, lambda, t, last + 1) / (1.0 - ratio);
}

}  // namespace

RunResult run_converge(const Scenario& s, const RunOptions& opt) {
  const auto start = Clock::now();
  check_times(s);
  RunResult res{"converge", {}, base_summary(s, "converge")};
  const double lambda = scenario_lambda(s);
  const int m_env = classical_order(s);
  const std::size_t ne = s.epsilons.size(), nt = s.times.size(), no = s.observables.size();

  const auto states = build_states(s, opt.jobs);
  res.summary["lambda_audit"] = lambda_audit(s.epsilons, states);
  const WignerMeasure mu = limit_measure(s);
  std::vector<WignerMeasure> pushed(nt);
  parallel_for(nt, opt.jobs, [&](std::size_t j) {
    pushed[j] = push_forward(mu, s.a, s.q, s.times[j], s.tol.ode_tol, s.slice);
  });
  const QuantumEvolution evo(s.a, s.q);
  std::vector<std::unique_ptr<QuantizedSymbol>> quantized;
  for (std::size_t i = 0; i < ne; ++i)
    for (std::size_t k = 0; k < no; ++k) {
      quantized.push_back(std::make_unique<QuantizedSymbol>(s.observables[k].symbol, s.epsilons[i]));
    }

  res.rows.resize(ne * nt * no);
  std::vector<std::string> errors(ne * nt);
  parallel_for(ne * nt, opt.jobs, [&](std::size_t task) {
    const std::size_t i = task / nt, j = task % nt;
    const double eps = s.epsilons[i], t = s.times[j];
    try {
      const DensityState rho_t = evo.propagate(states[i], t);
      for (std::size_t k = 0; k < no; ++k) {
        const auto row_start = Clock::now();
        const auto& b = s.observables[k].symbol;
        ResultRow row;
        row.command = "converge";
        row.epsilon = eps;
        row.t = t;
        row.observable = s.observables[k].label;
        row.lhs = wick_expectation(rho_t, *quantized[i * no + k]);
        row.rhs = measure_expectation(pushed[j], b);
        row.abs_error = std::abs(row.lhs - row.rhs);
        const Envelopes env = envelopes(b, s.q, lambda, eps, t, m_env);
        for (double a : env.a) row.envelope_a += a;
        for (double bb : env.b) row.envelope_b += bb;
        row.envelope_c = env.c;
        row.wall_ms = ms_since(row_start);
        res.rows[(i * nt + j) * no + k] = row;
      }
    } catch (const std::exception& e) {
      errors[task] = e.what();
      for (std::size_t k = 0; k < no; ++k) {
        res.rows[(i * nt + j) * no + k] = failed_row("converge", eps, t, s.observables[k].label);
      }
    }
  });
  for (std::size_t task = 0; task < errors.size(); ++task) {
    if (!errors[task].empty()) record_failure(res.summary, s.epsilons[task / nt], s.times[task % nt], errors[task]);
  }

  const double floor = std::max(1e-9, 100.0 * s.tol.tail_tol);
  json fits = json::array();
  for (std::size_t j = 0; j < nt; ++j)
    for (std::size_t k = 0; k < no; ++k) {
      std::vector<double> err;
      for (std::size_t i = 0; i < ne; ++i) err.push_back(res.rows[(i * nt + j) * no + k].abs_error);
      bool decreasing = true;
      for (std::size_t i = 1; i < ne; ++i) decreasing = decreasing && err[i] < err[i - 1];
      json f = {{"t", s.times[j]}, {"observable", s.observables[k].label}, {"errors", err},
                {"strictly_decreasing", decreasing}};
      f["order"] = ne >= 2 ? order_json(fit_order(s.epsilons, err, floor)) : json(nullptr);
      fits.push_back(f);
    }
  res.summary["fitted_orders"] = fits;
  res.summary["wall_ms"] = ms_since(start);
  return res;
}

RunResult run_dyson(const Scenario& s, const RunOptions& opt) {
  const auto start = Clock::now();
  RunResult res{"dyson", {}, base_summary(s, "dyson")};
  const double lambda = scenario_lambda(s);
  const int m_cl = classical_order(s);
  const int m_q = std::min(m_cl, kMaxQuadratureOrder);
  const std::size_t ne = s.epsilons.size(), nt = s.times.size(), no = s.observables.size();
  const WignerMeasure mu = limit_measure(s);
  res.summary["M_classical"] = m_cl;
  res.summary["M_quantum"] = m_q;
  res.summary["majorant_ratio"] = json::array();
  for (double t : s.times) res.summary["majorant_ratio"].push_back(number(8.0 * lambda * std::abs(t) * op_norm(s.q.kernel())));

  // classical series, one task per (t, observable)
  std::vector<DysonTerms> terms(nt * no);
  std::vector<std::vector<ResultRow>> classical(nt * no);
  std::vector<std::string> errors(nt * no);
  parallel_for(nt * no, opt.jobs, [&](std::size_t task) {
    const std::size_t j = task / no, k = task % no;
    const double t = s.times[j];
    const auto& b = s.observables[k].symbol;
    const auto task_start = Clock::now();
    try {
      terms[task] = dyson_terms(b, s.q, s.a, t, m_cl);
      const cplx flow = measure_expectation(push_forward(mu, s.a, s.q, t, s.tol.ode_tol, s.slice), b);
      cplx im_pow = 1.0, sum = 0.0;
      for (int m = 0; m <= m_cl; ++m) {
        sum += im_pow * measure_expectation(mu, terms[task].integrals[static_cast<std::size_t>(m)]);
        im_pow *= cplx(0.0, 1.0);
        ResultRow row{"dyson", 0.0, t, s.observables[k].label + "|M=" + std::to_string(m), sum, flow,
                      std::abs(sum - flow)};
        row.envelope_a = envelope_tail(b, s.q, lambda, t, m);
        row.envelope_c = envelopes(b, s.q, lambda, 0.0, t, m).c;
        classical[task].push_back(row);
      }
      if (!classical[task].empty()) classical[task].back().wall_ms = ms_since(task_start);
    } catch (const std::exception& e) {
      errors[task] = e.what();
      for (int m = 0; m <= m_cl; ++m) {
        classical[task].push_back(failed_row("dyson", 0.0, t, s.observables[k].label + "|M=" + std::to_string(m)));
      }
    }
  });
  for (std::size_t task = 0; task < errors.size(); ++task) {
    if (!errors[task].empty()) record_failure(res.summary, 0.0, s.times[task / no], errors[task]);
  }
  json classical_json = json::array();
  for (std::size_t task = 0; task < classical.size(); ++task) {
    json errs = json::array(), ratios = json::array();
    for (std::size_t m = 0; m < classical[task].size(); ++m) {
      errs.push_back(number(classical[task][m].abs_error));
      if (m > 0) ratios.push_back(number(classical[task][m].abs_error / classical[task][m - 1].abs_error));
    }
    classical_json.push_back({{"t", s.times[task / no]},
                              {"observable", s.observables[task % no].label},
                              {"errors", errs},
                              {"ratios", ratios}});
    for (auto& row : classical[task]) res.rows.push_back(std::move(row));
  }
  res.summary["classical"] = classical_json;

  // quantum remainder, one task per (eps, t)
  const auto states = build_states(s, opt.jobs);
  res.summary["lambda_audit"] = lambda_audit(s.epsilons, states);
  const QuantumEvolution evo(s.a, s.q);
  std::vector<ResultRow> quantum(ne * nt * no);
  std::vector<std::string> qerrors(ne * nt);
  parallel_for(ne * nt, opt.jobs, [&](std::size_t task) {
    const std::size_t i = task / nt, j = task % nt;
    const double eps = s.epsilons[i], t = s.times[j];
    try {
      const DensityState rho_t = evo.propagate(states[i], t);
      for (std::size_t k = 0; k < no; ++k) {
        const auto row_start = Clock::now();
        const auto& b = s.observables[k].symbol;
        const auto& tm = terms[j * no + k];
        if (tm.integrals.empty()) throw std::runtime_error("classical terms unavailable");
        cplx im_pow = 1.0, series = 0.0;
        for (int m = 0; m <= m_q; ++m) {
          series += im_pow * wick_expectation(states[i], tm.integrals[static_cast<std::size_t>(m)]);
          im_pow *= cplx(0.0, 1.0);
        }
        ResultRow row{"dyson_quantum", eps, t, s.observables[k].label, wick_expectation(rho_t, QuantizedSymbol(b, eps)),
                      series};
        row.abs_error = std::abs(row.lhs - row.rhs);
        const Envelopes env = envelopes(b, s.q, lambda, eps, t, m_q);
        for (double a : env.a) row.envelope_a += a;
        for (double bb : env.b) row.envelope_b += bb;
        row.envelope_c = env.c;
        row.wall_ms = ms_since(row_start);
        quantum[(i * nt + j) * no + k] = row;
      }
    } catch (const std::exception& e) {
      qerrors[task] = e.what();
      for (std::size_t k = 0; k < no; ++k) {
        quantum[(i * nt + j) * no + k] = failed_row("dyson_quantum", eps, t, s.observables[k].label);
      }
    }
  });
  for (std::size_t task = 0; task < qerrors.size(); ++task) {
    if (!qerrors[task].empty()) record_failure(res.summary, s.epsilons[task / nt], s.times[task % nt], qerrors[task]);
  }
  json remainder = json::array();
  for (std::size_t j = 0; j < nt; ++j)
    for (std::size_t k = 0; k < no; ++k) {
      json errs = json::array(), ratios = json::array();
      for (std::size_t i = 0; i < ne; ++i) {
        const double e = quantum[(i * nt + j) * no + k].abs_error;
        errs.push_back(number(e));
        if (i > 0) ratios.push_back(number(e / quantum[((i - 1) * nt + j) * no + k].abs_error));
      }
      remainder.push_back({{"t", s.times[j]}, {"observable", s.observables[k].label}, {"errors", errs},
                           {"ratios", ratios}});
    }
  res.summary["quantum_remainder"] = remainder;
  for (auto& row : quantum) res.rows.push_back(std::move(row));
  res.summary["wall_ms"] = ms_since(start);
  return res;
}

std::vector<BoundInstance> bound_instances(std::uint64_t seed, int count) {
  PortableRng rng(seed);
  std::vector<BoundInstance> out;
  for (int k = 0; k < count; ++k) {
    BoundInstance in;
    in.d = rng.integer(1, 3);
    do {
      in.p = rng.integer(0, 2);
      in.q = rng.integer(0, 2);
    } while (in.p == 0 && in.q == 0);
    in.m = rng.integer(0, 3);
    in.r = rng.integer(0, in.m);
    const auto dp = sym_dim(in.d, in.p), dq = sym_dim(in.d, in.q), d2 = sym_dim(in.d, 2);
    const PolySymbol b(SymOperator(in.d, in.p, in.q, rng.complex_matrix(dq, dp)));
    PolySymbol q(SymOperator(in.d, 2, 2, rng.hermitian_matrix(d2)));
    q *= cplx(rng.uniform(0.1, 1.0) / op_norm(q.kernel()));
    const CMatrix a = rng.hermitian_matrix(static_cast<std::size_t>(in.d));
    std::vector<double> times;
    for (int i = 0; i < in.m; ++i) times.push_back(rng.uniform(-1.0, 1.0));
    in.t = rng.uniform(-1.0, 1.0);
    in.norm = op_norm(c_mr(q, b, a, times, in.t, in.r).kernel());
    in.bound = bound_lemma(in.p, in.q, in.m, in.r, op_norm(q.kernel()), op_norm(b.kernel()));
    out.push_back(in);
  }
  return out;
}

RunResult run_bounds(const Scenario& s, const RunOptions&) {
  const auto start = Clock::now();
  RunResult res{"bounds", {}, base_summary(s, "bounds")};
  const auto inst = bound_instances(s.seed, s.bounds_instances);
  int violations = 0;
  double worst = 0.0;
  for (std::size_t k = 0; k < inst.size(); ++k) {
    const auto& in = inst[k];
    ResultRow row;
    row.command = "bounds";
    row.t = in.t;
    row.observable = "i=" + std::to_string(k) + ";d=" + std::to_string(in.d) + ";p=" + std::to_string(in.p) +
                     ";q=" + std::to_string(in.q) + ";m=" + std::to_string(in.m) + ";r=" + std::to_string(in.r);
    row.lhs = in.norm;
    row.rhs = in.bound;
    row.abs_error = std::abs(in.norm - in.bound);
    res.rows.push_back(row);
    if (in.norm > in.bound * (1.0 + 1e-12)) ++violations;
    worst = std::max(worst, in.norm / in.bound);
  }
  res.summary["instances"] = inst.size();
  res.summary["violations"] = violations;
  res.summary["max_ratio"] = worst;
  res.summary["wall_ms"] = ms_since(start);
  return res;
}

RunResult run_transport(const Scenario& s, const RunOptions& opt) {
  const auto start = Clock::now();
  RunResult res{"transport", {}, base_summary(s, "transport")};
  const WignerMeasure mu = limit_measure(s);
  const std::size_t nt = s.times.size(), no = s.observables.size();
  res.rows.resize(nt * no);
  std::vector<std::string> errors(nt * no);
  parallel_for(nt * no, opt.jobs, [&](std::size_t task) {
    const std::size_t j = task / no, k = task % no;
    const double t = s.times[j];
    const auto row_start = Clock::now();
    try {
      const auto sides =
          transport_sides(mu, s.a, s.q, s.observables[k].symbol, t, s.tol.quad_tol, s.tol.ode_tol, s.slice);
      ResultRow row{"transport", 0.0, t, s.observables[k].label, sides.lhs, sides.rhs, std::abs(sides.lhs - sides.rhs)};
      row.wall_ms = ms_since(row_start);
      res.rows[task] = row;
    } catch (const std::exception& e) {
      errors[task] = e.what();
      res.rows[task] = failed_row("transport", 0.0, t, s.observables[k].label);
    }
  });
  double worst = 0.0;
  for (std::size_t task = 0; task < errors.size(); ++task) {
    if (!errors[task].empty()) record_failure(res.summary, 0.0, s.times[task / no], errors[task]);
    worst = std::max(worst, res.rows[task].abs_error);
  }
  res.summary["max_residual"] = number(worst);
  res.summary["wall_ms"] = ms_since(start);
  return res;
}

RunResult run_command(const std::string& command, const Scenario& s, const RunOptions& opt) {
  if (command == "converge") return run_converge(s, opt);
  if (command == "dyson") return run_dyson(s, opt);
  if (command == "bounds") return run_bounds(s, opt);
  if (command == "transport") return run_transport(s, opt);
  throw std::invalid_argument("unknown command \"" + command + "\"");
}

}  // namespace fockmf
