#include "fockmf/fock.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace fockmf {

double FockState::norm_squared() const {
  double s = 0.0;
  for (const auto& [n, v] : sectors) s += v.squaredNorm();
  return s;
}

DensityState::DensityState(FockState pure) { components_.emplace_back(1.0, std::move(pure)); }

DensityState::DensityState(std::vector<std::pair<double, FockState>> components)
    : components_(std::move(components)) {
  if (components_.empty()) throw std::invalid_argument("DensityState: no components");
  double total = 0.0;
  for (const auto& [w, psi] : components_) {
    if (!(w > 0.0)) throw std::invalid_argument("DensityState: weights must be positive");
    if (psi.d != components_.front().second.d || psi.eps != components_.front().second.eps) {
      throw std::invalid_argument("DensityState: components disagree on d or eps");
    }
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("DensityState: weights must sum to 1");
}

Projector::Projector(CMatrix p, double tol) : p_(std::move(p)) {
  if (p_.rows() != p_.cols()) throw std::invalid_argument("Projector: matrix must be square");
  if ((p_ - p_.adjoint()).cwiseAbs().maxCoeff() > tol || (p_ * p_ - p_).cwiseAbs().maxCoeff() > tol) {
    throw std::invalid_argument("Projector: matrix is not an orthogonal projector");
  }
  rank_ = static_cast<int>(std::lround(p_.trace().real()));
}

Projector Projector::onto(const CMatrix& columns) {
  Eigen::HouseholderQR<CMatrix> qr(columns);
  const CMatrix q = qr.householderQ() * CMatrix::Identity(columns.rows(), columns.cols());
  return Projector(q * q.adjoint());
}

SymOperator wick_matrix(const PolySymbol& b, int n, double eps) {
  const int p = b.p(), q = b.q();
  if (n < 0) throw std::invalid_argument("wick_matrix: negative sector");
  if (n < p) return SymOperator(b.d(), n, std::max(n - p + q, 0));
  const double pref = std::exp(0.5 * (std::lgamma(n + 1.0) + std::lgamma(n + q - p + 1.0)) -
                               std::lgamma(n - p + 1.0)) *
                      std::pow(eps, 0.5 * (p + q));
  SymOperator w = symmetrize_extend(b.kernel(), n);
  w.matrix *= pref;
  return w;
}

std::shared_ptr<const CMatrix> QuantizedSymbol::sector(int n) const {
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = cache_.find(n);
    if (it != cache_.end()) return it->second;
  }
  auto m = std::make_shared<const CMatrix>(wick_matrix(b_, n, eps_).matrix);
  std::lock_guard<std::mutex> lock(mu_);
  return cache_.emplace(n, std::move(m)).first->second;
}

cplx wick_expectation(const FockState& psi, const QuantizedSymbol& b) {
  const int p = b.symbol().p(), q = b.symbol().q();
  cplx s = 0.0;
  for (const auto& [n, v] : psi.sectors) {
    if (n < p) continue;
    auto out = psi.sectors.find(n - p + q);
    if (out == psi.sectors.end()) continue;
    s += out->second.dot(*b.sector(n) * v);
  }
  return s;
}

cplx wick_expectation(const DensityState& rho, const QuantizedSymbol& b) {
  cplx s = 0.0;
  for (const auto& [w, psi] : rho.components()) s += w * wick_expectation(psi, b);
  return s;
}

cplx wick_expectation(const DensityState& rho, const PolySymbol& b) {
  return wick_expectation(rho, QuantizedSymbol(b, rho.eps()));
}

SymOperator hamiltonian_sector(const CMatrix& a, const PolySymbol& q, int n, double eps) {
  if (!is_hermitian(a)) throw std::invalid_argument("hamiltonian_sector: A is not hermitian");
  if (q.p() != 2 || q.q() != 2 || !is_hermitian(q.kernel().matrix)) {
    throw std::invalid_argument("hamiltonian_sector: interaction kernel must be a self-adjoint (2,2) kernel");
  }
  SymOperator h = wick_matrix(PolySymbol::quadratic(a), n, eps);
  h.matrix += wick_matrix(q, n, eps).matrix;
  return h;
}

FockState coherent_state(const CVector& z0, double eps, double tail_tol) {
  if (!(eps > 0.0)) throw std::invalid_argument("coherent_state: eps must be positive");
  if (!(tail_tol > 0.0)) throw std::invalid_argument("coherent_state: tail_tol must be positive");
  FockState psi;
  psi.d = static_cast<int>(z0.size());
  psi.eps = eps;
  const double r = z0.norm();
  if (r == 0.0) {
    psi.sectors[0] = CVector::Ones(1);
    return psi;
  }
  const double mean = r * r / eps;
  const CVector dir = z0 / r;

  // Poisson(mean) masses, far enough into the tail that the remainder is
  // below double precision.
  const int n_big = static_cast<int>(mean + 40.0 * std::sqrt(mean) + 60.0);
  std::vector<double> log_pmf(static_cast<std::size_t>(n_big) + 1);
  for (int n = 0; n <= n_big; ++n) log_pmf[n] = -mean + n * std::log(mean) - std::lgamma(n + 1.0);
  std::vector<double> tail(static_cast<std::size_t>(n_big) + 2, 0.0);  // tail[n] = P(N >= n)
  for (int n = n_big; n >= 0; --n) tail[n] = tail[n + 1] + std::exp(log_pmf[n]);

  int n_max = 0;
  while (n_max < n_big && tail[n_max + 1] >= tail_tol) ++n_max;
  for (int n = 0; n <= n_max; ++n) {
    psi.sectors[n] = std::exp(0.5 * log_pmf[n]) * power_vector(dir, n).coeffs;
  }
  psi.tail_mass = tail[n_max + 1];
  return psi;
}

FockState hermite_state(const CVector& z, int n) {
  if (n <= 0) throw std::invalid_argument("hermite_state: need n >= 1");
  if (z.norm() == 0.0) throw std::invalid_argument("hermite_state: z must be nonzero");
  FockState psi;
  psi.d = static_cast<int>(z.size());
  psi.eps = 1.0 / n;
  psi.sectors[n] = power_vector(z / z.norm(), n).coeffs;
  return psi;
}

double number_moment(const DensityState& rho, int k) {
  if (k < 0) throw std::invalid_argument("number_moment: negative order");
  double s = 0.0;
  for (const auto& [w, psi] : rho.components()) {
    for (const auto& [n, v] : psi.sectors) s += w * std::pow(psi.eps * n, k) * v.squaredNorm();
  }
  return s;
}

double h0_lambda(const DensityState& rho, int kmax) {
  double lam = 0.0;
  for (int k = 1; k <= kmax; ++k) lam = std::max(lam, std::pow(number_moment(rho, k), 1.0 / k));
  return lam;
}

double gamma_defect(const DensityState& rho, const Projector& p) {
  if (p.matrix().rows() != rho.d()) throw std::invalid_argument("gamma_defect: dimension mismatch");
  std::map<int, CMatrix> lifted;
  double kept = 0.0;
  for (const auto& [w, psi] : rho.components()) {
    for (const auto& [n, v] : psi.sectors) {
      auto it = lifted.find(n);
      if (it == lifted.end()) it = lifted.emplace(n, second_quantize(p.matrix(), n)).first;
      kept += w * (it->second * v).squaredNorm();
    }
  }
  return std::clamp(1.0 - kept, 0.0, 1.0);
}

}  // namespace fockmf
