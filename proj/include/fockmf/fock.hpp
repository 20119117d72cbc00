#pragma once

// Truncated bosonic Fock space over C^d with the eps-scaled Wick
// quantization. Sector n carries N = eps * n.

#include <map>
#include <memory>
#include <mutex>
#include <utility>
#include <vector>

#include "fockmf/symbols.hpp"

namespace fockmf {

// Finitely supported vector of the Fock space. tail_mass is the squared norm
// discarded by truncation; states are not renormalized.
struct FockState {
  int d = 0;
  double eps = 0.0;
  std::map<int, CVector> sectors;
  double tail_mass = 0.0;

  double norm_squared() const;
  int max_sector() const { return sectors.empty() ? 0 : sectors.rbegin()->first; }
};

// Convex mixture of pure states.
class DensityState {
 public:
  DensityState() = default;
  explicit DensityState(FockState pure);
  DensityState(std::vector<std::pair<double, FockState>> components);

  const std::vector<std::pair<double, FockState>>& components() const { return components_; }
  int d() const { return components_.front().second.d; }
  double eps() const { return components_.front().second.eps; }

 private:
  std::vector<std::pair<double, FockState>> components_;
};

// Orthogonal projector on C^d.
class Projector {
 public:
  explicit Projector(CMatrix p, double tol = 1e-12);
  // Projector onto the span of the given columns.
  static Projector onto(const CMatrix& columns);

  const CMatrix& matrix() const { return p_; }
  int rank() const { return rank_; }

 private:
  CMatrix p_;
  int rank_ = 0;
};

// b^Wick restricted to sector n, mapping to sector n - p + q:
// 1[n >= p] sqrt(n! (n+q-p)!) / (n-p)! eps^{(p+q)/2} S_{n-p+q}(b~ (x) I).
SymOperator wick_matrix(const PolySymbol& b, int n, double eps);

// b^Wick with per-sector matrices built on first use. Safe for concurrent
// readers.
class QuantizedSymbol {
 public:
  QuantizedSymbol(PolySymbol b, double eps) : b_(std::move(b)), eps_(eps) {}

  const PolySymbol& symbol() const { return b_; }
  double eps() const { return eps_; }
  std::shared_ptr<const CMatrix> sector(int n) const;

 private:
  PolySymbol b_;
  double eps_;
  mutable std::mutex mu_;
  mutable std::map<int, std::shared_ptr<const CMatrix>> cache_;
};

cplx wick_expectation(const FockState& psi, const QuantizedSymbol& b);
cplx wick_expectation(const DensityState& rho, const QuantizedSymbol& b);
cplx wick_expectation(const DensityState& rho, const PolySymbol& b);

// H_eps = dGamma(A) + Q^Wick on sector n, with dGamma(A) = (<z, A z>)^Wick.
SymOperator hamiltonian_sector(const CMatrix& a, const PolySymbol& q, int n, double eps);

// Coherent state centred at z0: sector masses Poisson(|z0|^2 / eps),
// truncated at the first sector where the remaining mass drops below tail_tol.
FockState coherent_state(const CVector& z0, double eps, double tail_tol = 1e-10);

// Normalized (z/|z|)^{(x)n} with eps = 1/n.
FockState hermite_state(const CVector& z, int n);

// Tr[N^k rho] = sum over components and sectors of (eps n)^k |psi_n|^2.
double number_moment(const DensityState& rho, int k);

// Smallest lambda with Tr[N^j rho] <= lambda^j for 1 <= j <= kmax.
double h0_lambda(const DensityState& rho, int kmax);

// Tr[(1 - Gamma(P)) rho].
double gamma_defect(const DensityState& rho, const Projector& p);

}  // namespace fockmf
