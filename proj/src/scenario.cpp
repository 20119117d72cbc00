#include "fockmf/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>

#include "fockmf/random.hpp"

namespace fockmf {

using nlohmann::json;

namespace {

std::string join(const std::vector<std::string>& v) {
  std::string out = "invalid scenario:";
  for (const auto& s : v) out += "\n  " + s;
  return out;
}

class Checker {
 public:
  void fail(const std::string& path, const std::string& msg) { errors.push_back(path + ": " + msg); }

  std::optional<cplx> complex(const json& j, const std::string& path) {
    if (j.is_number()) return cplx(j.get<double>(), 0.0);
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
      return cplx(j[0].get<double>(), j[1].get<double>());
    }
    fail(path, "expected a number or a [re, im] pair");
    return std::nullopt;
  }

  std::optional<CVector> vector(const json& j, const std::string& path, Eigen::Index n) {
    if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != n) {
      fail(path, "expected " + std::to_string(n) + " complex entries");
      return std::nullopt;
    }
    CVector v(n);
    bool ok = true;
    for (Eigen::Index i = 0; i < n; ++i) {
      auto c = complex(j[static_cast<std::size_t>(i)], path + "[" + std::to_string(i) + "]");
      if (c) v[i] = *c;
      ok = ok && c.has_value();
    }
    if (!ok) return std::nullopt;
    return v;
  }

  std::optional<CMatrix> matrix(const json& j, const std::string& path, Eigen::Index rows, Eigen::Index cols) {
    if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows) {
      fail(path, "expected " + std::to_string(rows) + " rows of " + std::to_string(cols) + " entries");
      return std::nullopt;
    }
    CMatrix m(rows, cols);
    bool ok = true;
    for (Eigen::Index r = 0; r < rows; ++r) {
      auto row = vector(j[static_cast<std::size_t>(r)], path + "[" + std::to_string(r) + "]", cols);
      if (row) m.row(r) = row->transpose();
      ok = ok && row.has_value();
    }
    if (!ok) return std::nullopt;
    return m;
  }

  std::optional<double> number(const json& j, const std::string& key, const std::string& path) {
    if (!j.contains(key)) return std::nullopt;
    if (!j[key].is_number()) {
      fail(path, "expected a number");
      return std::nullopt;
    }
    return j[key].get<double>();
  }

  std::vector<std::string> errors;
};

std::optional<StateComponent> parse_component(Checker& ck, const json& j, const std::string& path, int d) {
  if (!j.is_object() || !j.contains("family") || !j["family"].is_string()) {
    ck.fail(path + ".family", "expected \"coherent\" or \"hermite\"");
    return std::nullopt;
  }
  StateComponent c;
  const std::string fam = j["family"];
  std::string key;
  if (fam == "coherent") {
    c.family = StateComponent::Family::coherent;
    key = "z0";
  } else if (fam == "hermite") {
    c.family = StateComponent::Family::hermite;
    key = "z";
  } else {
    ck.fail(path + ".family", "unknown family \"" + fam + "\"");
    return std::nullopt;
  }
  if (!j.contains(key)) {
    ck.fail(path + "." + key, "missing");
    return std::nullopt;
  }
  auto z = ck.vector(j[key], path + "." + key, d);
  if (!z) return std::nullopt;
  if (c.family == StateComponent::Family::hermite && z->norm() == 0.0) {
    ck.fail(path + "." + key, "must be nonzero");
    return std::nullopt;
  }
  c.z = *z;
  return c;
}

}  // namespace

ScenarioError::ScenarioError(std::vector<std::string> violations)
    : std::invalid_argument(join(violations)), violations_(std::move(violations)) {}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Scenario parse_scenario(const json& doc) {
  Checker ck;
  Scenario s;
  if (!doc.is_object()) throw ScenarioError({"<root>: expected a JSON object"});

  if (!doc.contains("d") || !doc["d"].is_number_integer() || doc["d"].get<int>() < 1) {
    throw ScenarioError({"d: expected a positive integer"});
  }
  s.d = doc["d"].get<int>();
  const int d = s.d;
  const auto d2 = static_cast<Eigen::Index>(sym_dim(d, 2));

  if (!doc.contains("A")) {
    ck.fail("A", "missing");
  } else if (auto a = ck.matrix(doc["A"], "A", d, d)) {
    if (!is_hermitian(*a)) ck.fail("A", "not hermitian to 1e-12");
    s.a = *a;
  }

  if (!doc.contains("Q_kernel")) {
    ck.fail("Q_kernel", "missing");
  } else if (doc["Q_kernel"].is_object()) {
    const auto& qk = doc["Q_kernel"];
    if (!qk.contains("random_seed") || !qk["random_seed"].is_number_integer() || qk["random_seed"].get<std::int64_t>() < 0) {
      ck.fail("Q_kernel.random_seed", "expected a non-negative integer");
    } else {
      const double norm = ck.number(qk, "norm", "Q_kernel.norm").value_or(0.5);
      if (!(norm >= 0.0)) ck.fail("Q_kernel.norm", "must be non-negative");
      PortableRng rng(qk["random_seed"].get<std::uint64_t>());
      CMatrix m = rng.hermitian_matrix(static_cast<std::size_t>(d2));
      m *= norm / op_norm(SymOperator(d, 2, 2, m));
      s.q = PolySymbol(SymOperator(d, 2, 2, m));
    }
  } else if (auto m = ck.matrix(doc["Q_kernel"], "Q_kernel", d2, d2)) {
    // the occupation basis already encodes slot exchange symmetry
    if (!is_hermitian(*m)) ck.fail("Q_kernel", "not self-adjoint to 1e-12");
    s.q = PolySymbol(SymOperator(d, 2, 2, *m));
  }

  if (!doc.contains("observables") || !doc["observables"].is_array() || doc["observables"].empty()) {
    ck.fail("observables", "expected a nonempty list");
  } else {
    for (std::size_t i = 0; i < doc["observables"].size(); ++i) {
      const auto& o = doc["observables"][i];
      const std::string path = "observables[" + std::to_string(i) + "]";
      if (!o.is_object() || !o.contains("p") || !o.contains("q") || !o["p"].is_number_integer() ||
          !o["q"].is_number_integer() || o["p"].get<int>() < 0 || o["q"].get<int>() < 0) {
        ck.fail(path, "expected non-negative integers p and q");
        continue;
      }
      const int p = o["p"], q = o["q"];
      std::string label = o.contains("label") && o["label"].is_string() ? o["label"].get<std::string>()
                                                                          : "obs" + std::to_string(i);
      if (label.find_first_of(",\"\n") != std::string::npos) ck.fail(path + ".label", "must not contain , \" or newline");
      if (!o.contains("kernel")) {
        ck.fail(path + ".kernel", "missing");
        continue;
      }
      auto k = ck.matrix(o["kernel"], path + ".kernel", static_cast<Eigen::Index>(sym_dim(d, q)),
                         static_cast<Eigen::Index>(sym_dim(d, p)));
      if (k) s.observables.push_back({label, PolySymbol(SymOperator(d, p, q, *k))});
    }
  }

  if (!doc.contains("state") || !doc["state"].is_object() || !doc["state"].contains("family") ||
      !doc["state"]["family"].is_string()) {
    ck.fail("state.family", "expected \"coherent\", \"hermite\" or \"mixture\"");
  } else {
    const auto& st = doc["state"];
    s.family = st["family"];
    if (s.family == "mixture") {
      if (!st.contains("components") || !st["components"].is_array() || st["components"].empty()) {
        ck.fail("state.components", "expected a nonempty list");
      } else {
        double total = 0.0;
        for (std::size_t i = 0; i < st["components"].size(); ++i) {
          const std::string path = "state.components[" + std::to_string(i) + "]";
          const auto& cj = st["components"][i];
          auto c = parse_component(ck, cj, path, d);
          const double w = cj.is_object() ? ck.number(cj, "weight", path + ".weight").value_or(-1.0) : -1.0;
          if (!(w > 0.0)) ck.fail(path + ".weight", "expected a positive weight");
          if (c) {
            c->weight = w;
            s.components.push_back(*c);
          }
          total += w;
        }
        if (std::abs(total - 1.0) > 1e-12) ck.fail("state.components", "weights must sum to 1");
      }
    } else if (auto c = parse_component(ck, st, "state", d)) {
      s.components.push_back(*c);
    }
  }

  if (!doc.contains("epsilons")) {
    ck.fail("epsilons", "missing");
  } else if (doc["epsilons"].is_object()) {
    const auto& rule = doc["epsilons"];
    if (!rule.contains("rule") || rule["rule"] != "1/n" || !rule.contains("n") || !rule["n"].is_array()) {
      ck.fail("epsilons", "expected {\"rule\": \"1/n\", \"n\": [...]}");
    } else {
      for (std::size_t i = 0; i < rule["n"].size(); ++i) {
        const auto& n = rule["n"][i];
        if (!n.is_number_integer() || n.get<long>() < 1) {
          ck.fail("epsilons.n[" + std::to_string(i) + "]", "expected a positive integer");
        } else {
          s.epsilons.push_back(1.0 / n.get<double>());
        }
      }
    }
  } else if (doc["epsilons"].is_array()) {
    for (std::size_t i = 0; i < doc["epsilons"].size(); ++i) {
      const auto& e = doc["epsilons"][i];
      if (!e.is_number()) {
        ck.fail("epsilons[" + std::to_string(i) + "]", "expected a number");
      } else {
        s.epsilons.push_back(e.get<double>());
      }
    }
  } else {
    ck.fail("epsilons", "expected a list or a rule");
  }
  if (s.epsilons.empty()) ck.fail("epsilons", "empty schedule");
  for (std::size_t i = 0; i < s.epsilons.size(); ++i) {
    if (!(s.epsilons[i] > 0.0)) ck.fail("epsilons", "values must be positive");
    if (i > 0 && !(s.epsilons[i] < s.epsilons[i - 1])) ck.fail("epsilons", "values must be strictly decreasing");
  }
  for (const auto& c : s.components) {
    if (c.family != StateComponent::Family::hermite) continue;
    for (double e : s.epsilons) {
      if (std::abs(1.0 / e - std::round(1.0 / e)) > 1e-9) {
        ck.fail("epsilons", "Hermite states need eps = 1/n");
        break;
      }
    }
    break;
  }

  if (!doc.contains("times") || !doc["times"].is_array()) {
    ck.fail("times", "expected a list of reals");
  } else {
    for (std::size_t i = 0; i < doc["times"].size(); ++i) {
      const auto& t = doc["times"][i];
      if (!t.is_number() || !std::isfinite(t.get<double>())) {
        ck.fail("times[" + std::to_string(i) + "]", "expected a finite number");
      } else {
        s.times.push_back(t.get<double>());
      }
    }
  }

  if (doc.contains("tolerances")) {
    const auto& tj = doc["tolerances"];
    if (!tj.is_object()) {
      ck.fail("tolerances", "expected an object");
    } else {
      s.tol.ode_tol = ck.number(tj, "ode_tol", "tolerances.ode_tol").value_or(s.tol.ode_tol);
      s.tol.quad_tol = ck.number(tj, "quad_tol", "tolerances.quad_tol").value_or(s.tol.quad_tol);
      s.tol.tail_tol = ck.number(tj, "tail_tol", "tolerances.tail_tol").value_or(s.tol.tail_tol);
      if (!(s.tol.ode_tol > 0.0)) ck.fail("tolerances.ode_tol", "must be positive");
      if (!(s.tol.quad_tol > 0.0)) ck.fail("tolerances.quad_tol", "must be positive");
      if (!(s.tol.tail_tol > 0.0)) ck.fail("tolerances.tail_tol", "must be positive");
    }
  }
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_integer() || doc["seed"].get<std::int64_t>() < 0) {
      ck.fail("seed", "expected a non-negative integer");
    } else {
      s.seed = doc["seed"].get<std::uint64_t>();
    }
  }
  if (doc.contains("dyson")) {
    const auto& dj = doc["dyson"];
    if (!dj.is_object() || (dj.contains("M_max") && !dj["M_max"].is_number_integer())) {
      ck.fail("dyson.M_max", "expected an integer");
    } else if (dj.contains("M_max")) {
      s.dyson_m_max = dj["M_max"];
      if (s.dyson_m_max < 0 || s.dyson_m_max > kMaxCollapsedOrder) {
        ck.fail("dyson.M_max", "expected 0 <= M_max <= " + std::to_string(kMaxCollapsedOrder));
      }
    }
  }
  if (doc.contains("bounds")) {
    const auto& bj = doc["bounds"];
    if (!bj.is_object() || (bj.contains("instances") && !bj["instances"].is_number_integer())) {
      ck.fail("bounds.instances", "expected an integer");
    } else if (bj.contains("instances")) {
      s.bounds_instances = bj["instances"];
      if (s.bounds_instances < 1) ck.fail("bounds.instances", "must be positive");
    }
  }
  if (doc.contains("slice")) {
    if (!doc["slice"].is_number() || !(doc["slice"].get<double>() > 0.0)) {
      ck.fail("slice", "expected a positive number");
    } else {
      s.slice = doc["slice"];
    }
  }

  if (!ck.errors.empty()) throw ScenarioError(ck.errors);
  s.source = doc;
  s.hash = fnv1a_hex(s.source.dump());
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ScenarioError({"<parse>: " + std::string(e.what())});
  }
  return parse_scenario(doc);
}

DensityState make_state(const Scenario& s, double eps) {
  std::vector<std::pair<double, FockState>> comps;
  for (const auto& c : s.components) {
    if (c.family == StateComponent::Family::coherent) {
      comps.emplace_back(c.weight, coherent_state(c.z, eps, s.tol.tail_tol));
    } else {
      FockState h = hermite_state(c.z, static_cast<int>(std::lround(1.0 / eps)));
      h.eps = eps;
      comps.emplace_back(c.weight, std::move(h));
    }
  }
  if (comps.size() == 1) return DensityState(std::move(comps.front().second));
  return DensityState(std::move(comps));
}

WignerMeasure limit_measure(const Scenario& s) {
  std::vector<Atom> atoms;
  for (const auto& c : s.components) {
    if (c.family == StateComponent::Family::coherent) {
      atoms.push_back({AtomKind::point, c.z, c.weight});
    } else {
      atoms.push_back({AtomKind::circle, c.z / c.z.norm(), c.weight});
    }
  }
  return WignerMeasure(std::move(atoms));
}

double scenario_lambda(const Scenario& s) {
  double lam = 0.0;
  const WignerMeasure mu = limit_measure(s);
  for (const auto& at : mu.atoms()) lam = std::max(lam, at.z.squaredNorm());
  // the vacuum needs no moment bound; keep T_0 finite
  return lam > 0.0 ? lam : 1.0;
}

double scenario_t0(const Scenario& s) { return radius_t0(scenario_lambda(s), s.q); }

}  // namespace fockmf
