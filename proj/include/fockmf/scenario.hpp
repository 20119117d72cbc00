#pragma once

// Scenario files: one JSON document describing (d, A, Q, observables, state
// family, eps schedule, times, tolerances, seed). Complex entries are either a
// number or a [re, im] pair.

#include <cstdint>
#include <filesystem>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "fockmf/wigner.hpp"
#include "json.hpp"

namespace fockmf {

class ScenarioError : public std::invalid_argument {
 public:
  explicit ScenarioError(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> violations_;
};

struct Tolerances {
  double ode_tol = 1e-12;
  double quad_tol = 1e-8;
  double tail_tol = 1e-12;
};

struct StateComponent {
  enum class Family { coherent, hermite };
  Family family = Family::coherent;
  CVector z;
  double weight = 1.0;
};

struct Scenario {
  int d = 0;
  CMatrix a;
  PolySymbol q;
  std::vector<LabeledSymbol> observables;
  std::string family;  // coherent | hermite | mixture
  std::vector<StateComponent> components;
  std::vector<double> epsilons;
  std::vector<double> times;
  Tolerances tol;
  std::uint64_t seed = 0;
  int dyson_m_max = 3;
  int bounds_instances = 100;
  double slice = std::numeric_limits<double>::infinity();  // infinite: no slicing

  nlohmann::json source;  // validated document, keys sorted
  std::string hash;       // 16 hex digits of FNV-1a 64 over source.dump()
};

// Every violated invariant is reported with its field path.
Scenario parse_scenario(const nlohmann::json& doc);
Scenario load_scenario(const std::filesystem::path& path);

std::string fnv1a_hex(const std::string& bytes);

// Quantum state of the family at eps.
DensityState make_state(const Scenario& s, double eps);

// Limit measure of the family: a point mass for each coherent component and
// the full circle orbit through z/|z| for each Hermite component.
WignerMeasure limit_measure(const Scenario& s);

// lambda of the limit measure: max over atoms of |z|^2, so that
// int |z|^{2k} dmu <= lambda^k for every k.
double scenario_lambda(const Scenario& s);
double scenario_t0(const Scenario& s);

}  // namespace fockmf
