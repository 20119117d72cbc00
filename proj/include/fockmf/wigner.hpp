#pragma once

// Finite Wigner measures built from point masses and circle orbits
// {e^{i theta} z : theta in [0, 2pi)}, their push-forward by the Hartree flow
// and the transport equation residual.

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "fockmf/dynamics.hpp"

namespace fockmf {

enum class AtomKind { point, circle };

struct Atom {
  AtomKind kind = AtomKind::point;
  CVector z;
  double weight = 1.0;
};

class WignerMeasure {
 public:
  WignerMeasure() = default;
  // Weights must be positive and sum to 1.
  explicit WignerMeasure(std::vector<Atom> atoms);

  static WignerMeasure point(const CVector& z) { return WignerMeasure({Atom{AtomKind::point, z, 1.0}}); }
  static WignerMeasure circle(const CVector& z) { return WignerMeasure({Atom{AtomKind::circle, z, 1.0}}); }

  const std::vector<Atom>& atoms() const { return atoms_; }
  int d() const { return static_cast<int>(atoms_.front().z.size()); }

 private:
  std::vector<Atom> atoms_;
};

// int b dmu. A circle orbit contributes b(z) when p = q and 0 otherwise.
cplx measure_expectation(const WignerMeasure& mu, const PolySymbol& b);

// mu_t = mu o F_{-t}; with Q = 0 this is the free push-forward by e^{-itA}.
// Flows longer than slice are composed piecewise.
WignerMeasure push_forward(const WignerMeasure& mu, const CMatrix& a, const PolySymbol& q, double t,
                           double ode_tol = 1e-12, double slice = std::numeric_limits<double>::infinity());

// Adaptive Gauss-Kronrod (7, 15) with bisection until the local estimate is
// below tol. Throws std::runtime_error when max_intervals is exceeded.
cplx integrate_adaptive(const std::function<cplx(double)>& f, double lo, double hi, double tol,
                        int max_intervals = 200);

// lhs = mu_t(b), rhs = mu_t^0(b) + i int_0^t mu_s({Q, b_{t-s}}) ds
struct TransportSides {
  cplx lhs;
  cplx rhs;
};
TransportSides transport_sides(const WignerMeasure& mu, const CMatrix& a, const PolySymbol& q, const PolySymbol& b,
                               double t, double quad_tol, double ode_tol = 1e-12,
                               double slice = std::numeric_limits<double>::infinity());

// |lhs - rhs| of transport_sides
double transport_residual(const WignerMeasure& mu, const CMatrix& a, const PolySymbol& q, const PolySymbol& b,
                          double t, double quad_tol, double ode_tol = 1e-12);

// Least-squares slope of log(err) against log(eps). exact is set when every
// error is below floor; order is then infinite.
struct OrderFit {
  double order = 0.0;
  bool exact = false;
};
OrderFit fit_order(const std::vector<double>& eps, const std::vector<double>& err, double floor = 1e-10);

struct LabeledSymbol {
  std::string label;
  PolySymbol symbol;
};

// Every elementary kernel E_ij on C^d for 0 <= p, q <= 2.
std::vector<LabeledSymbol> default_dictionary(int d);

struct LimitRow {
  std::string label;
  std::vector<double> errors;  // |Tr[rho_eps b^Wick] - int b dmu|, one per eps
  OrderFit fit;
};

std::vector<LimitRow> identify_limit(const std::function<DensityState(double)>& family,
                                     const std::vector<double>& epsilons, const WignerMeasure& candidate,
                                     const std::vector<LabeledSymbol>& dictionary, double floor = 1e-10);

}  // namespace fockmf
