#pragma once

// Quantum evolution e^{-i(t/eps)H_eps} sector by sector, the Hartree flow
// i dz/dt = Az + d_zbar Q(z), and the Dyson expansion of b o F_t in iterated
// brackets C_0^(m) with its norm envelopes.

#include <map>
#include <memory>
#include <mutex>
#include <utility>
#include <vector>

#include "fockmf/fock.hpp"

namespace fockmf {

struct FlowResult {
  CVector z_t;
  double energy_drift = 0.0;
  double norm_drift = 0.0;
  int steps = 0;
};

struct Envelopes {
  std::vector<double> a;  // A_m, m = 0..M
  std::vector<double> b;  // B_m, m = 0..M (B_0 = 0)
  double c = 0.0;         // C_M
};

struct SeriesReport {
  std::vector<cplx> terms;         // i^m int C_0^(m), m = 0..M
  std::vector<cplx> partial_sums;  // partial_sums[M] = sum_{m <= M} terms[m]
  Envelopes envelopes;
  std::vector<double> quad_error;  // estimated quadrature error per order
  double t0 = 0.0;
  bool converged = false;
};

// Dynamics generated by H_eps = dGamma(A) + Q^Wick. Sector eigendecompositions
// are computed once per (eps, n) and shared between threads.
class QuantumEvolution {
 public:
  QuantumEvolution(CMatrix a, PolySymbol q);

  const CMatrix& a() const { return a_; }
  const PolySymbol& q() const { return q_; }

  // e^{-i(t/eps)H_n}
  CMatrix propagator(int n, double eps, double t) const;
  FockState propagate(const FockState& psi, double t) const;
  DensityState propagate(const DensityState& rho, double t) const;

 private:
  struct Eig {
    CMatrix vecs;
    Eigen::VectorXd vals;
  };
  std::shared_ptr<const Eig> sector(int n, double eps) const;

  CMatrix a_;
  PolySymbol q_;
  mutable std::mutex mu_;
  mutable std::map<std::pair<double, int>, std::shared_ptr<const Eig>> cache_;
};

DensityState propagate_quantum(const DensityState& rho, const CMatrix& a, const PolySymbol& q, double t);

// Tr[rho e^{i(t/eps)H} b^Wick e^{-i(t/eps)H}]
cplx heisenberg_expectation(const DensityState& rho, const QuantizedSymbol& b, const QuantumEvolution& evo,
                            double t);
cplx heisenberg_expectation(const DensityState& rho, const PolySymbol& b, const CMatrix& a, const PolySymbol& q,
                            double t);

// h(z) = <z, Az> + Q(z)
double hartree_energy(const CMatrix& a, const PolySymbol& q, const CVector& z);

// Adaptive Dormand-Prince 5(4) on w_t = e^{itA} z_t. Throws std::runtime_error
// on step-size underflow.
FlowResult hartree_flow(const CVector& z0, const CMatrix& a, const PolySymbol& q, double t, double ode_tol = 1e-10);

// Composition of flows over consecutive pieces of length at most slice.
FlowResult flow_sliced(const CVector& z0, const CMatrix& a, const PolySymbol& q, double t, double slice,
                       double ode_tol = 1e-10);

// Gauss-Legendre nodes and weights on [0, 1].
std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n);

// Largest order integrated by quadrature when A != 0.
inline constexpr int kMaxQuadratureOrder = 3;
// Largest order of the collapsed series when A = 0.
inline constexpr int kMaxCollapsedOrder = 25;

// Simplex integrals int_{t > t_1 > ... > t_m > 0} C_0^(m)(t_m, ..., t_1, t) as
// symbols, m = 0..m_max (signed orientation for t < 0). For A = 0 the
// integrand is constant and the integral is t^m/m! C_0^(m); otherwise nested
// Gauss-Legendre with `nodes` points per level, m_max <= kMaxQuadratureOrder.
// quad_error[m] compares against a rule with nodes + 4 points (0 when exact).
struct DysonTerms {
  std::vector<PolySymbol> integrals;
  std::vector<double> quad_error;
};
DysonTerms dyson_terms(const PolySymbol& b, const PolySymbol& q, const CMatrix& a, double t, int m_max,
                       int nodes = 10);

// T_0 = (8 lambda |Q~|)^{-1}; +infinity when Q = 0.
double radius_t0(double lambda, double norm_q);
double radius_t0(double lambda, const PolySymbol& q);

// Upper envelopes from the norm bound for C^(m)_0 times the simplex volume.
Envelopes envelopes(const PolySymbol& b, const PolySymbol& q, double lambda, double eps, double t, int m_max);

// 2^{P-1} |b~| (8 lambda |t| |Q~|)^m, P = max(p, q): majorant of A_m / lambda^{(p+q)/2}.
double geometric_majorant(const PolySymbol& b, const PolySymbol& q, double lambda, double t, int m);

// Partial sums of sum_m i^m int C_0^(m)(z). With A != 0, m_max is capped at
// kMaxQuadratureOrder. converged is |t| < T_0 for the given lambda.
SeriesReport dyson_classical(const PolySymbol& b, const PolySymbol& q, const CMatrix& a, const CVector& z, double t,
                             int m_max, double lambda, double quad_tol = 1e-10);

// sum_{m <= m_max} i^m int Tr[rho (C_0^(m))^Wick].
cplx dyson_quantum(const DensityState& rho, const PolySymbol& b, const PolySymbol& q, const CMatrix& a, double t,
                   int m_max);

// F_t(z0) by composing the coordinate Dyson series over pieces of length at
// most slice.
CVector dyson_sliced(const CVector& z0, const CMatrix& a, const PolySymbol& q, double t, double slice, int m_max);

}  // namespace fockmf
