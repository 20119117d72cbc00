#include <cmath>
#include <numbers>

#include "doctest.h"
#include "fockmf/wigner.hpp"
#include "oracles.hpp"

using namespace fockmf;

namespace {

PolySymbol quartic_1d() { return PolySymbol(SymOperator(1, 2, 2, 0.5 * CMatrix::Ones(1, 1))); }

CVector scalar(cplx z) {
  CVector v(1);
  v << z;
  return v;
}

CMatrix diag2(double a, double b) {
  CMatrix m = CMatrix::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

// Average of b over 16 equally spaced points of the circle through z.
cplx circle_average(const PolySymbol& b, const CVector& z) {
  cplx s = 0.0;
  for (int k = 0; k < 16; ++k) s += eval(b, std::exp(cplx(0.0, 2 * std::numbers::pi * k / 16)) * z);
  return s / 16.0;
}

}  // namespace

TEST_CASE("WignerMeasure validation") {
  const CVector z = CVector::Ones(2);
  CHECK_NOTHROW(WignerMeasure({{AtomKind::point, z, 0.25}, {AtomKind::circle, z, 0.75}}));
  CHECK_THROWS(WignerMeasure({{AtomKind::point, z, 0.5}}));
  CHECK_THROWS(WignerMeasure({{AtomKind::point, z, 1.5}, {AtomKind::point, z, -0.5}}));
  CHECK_THROWS(WignerMeasure({{AtomKind::point, z, 0.5}, {AtomKind::point, CVector::Ones(3), 0.5}}));
  CHECK_THROWS(WignerMeasure(std::vector<Atom>{}));
}

TEST_CASE("measure_expectation") {
  PortableRng rng(61);
  const CVector z = rng.complex_vector(2);
  for (int p = 0; p <= 2; ++p)
    for (int q = 0; q <= 2; ++q) {
      const auto b = oracle::random_symbol(rng, 2, p, q);
      CHECK(measure_expectation(WignerMeasure::point(z), b) == eval(b, z));
      const cplx circ = measure_expectation(WignerMeasure::circle(z), b);
      CHECK(std::abs(circ - circle_average(b, z)) < 1e-12);
      if (p != q) CHECK(circ == cplx(0.0));
    }
  const auto b11 = oracle::random_symbol(rng, 2, 1, 1);
  CHECK(std::abs(measure_expectation(WignerMeasure::circle(z), b11) - z.dot(b11.kernel().matrix * z)) < 1e-12);
  const WignerMeasure mix({{AtomKind::point, z, 0.3}, {AtomKind::circle, -2.0 * z, 0.7}});
  CHECK(std::abs(measure_expectation(mix, b11) - (0.3 * eval(b11, z) + 0.7 * eval(b11, -2.0 * z))) < 1e-12);
}

TEST_CASE("push_forward") {
  PortableRng rng(62);
  const CMatrix a = rng.hermitian_matrix(2);
  const PolySymbol q = oracle::random_interaction(rng, 2, 0.5);
  const CVector z = rng.complex_vector(2) / std::sqrt(2.0);
  const WignerMeasure mu({{AtomKind::point, z, 0.4}, {AtomKind::circle, 0.5 * z, 0.6}});

  const auto same = push_forward(mu, a, q, 0.0);
  for (std::size_t i = 0; i < 2; ++i) CHECK((same.atoms()[i].z - mu.atoms()[i].z).norm() == 0.0);

  const auto free = push_forward(WignerMeasure::point(z), a, PolySymbol::zero(2, 2, 2), 0.8);
  CHECK((free.atoms()[0].z - oracle::expm(cplx(0.0, -0.8) * a) * z).norm() < 1e-12);

  const auto one = push_forward(WignerMeasure::point(scalar(cplx(0.3, 0.9))), CMatrix::Zero(1, 1), quartic_1d(), 1.4);
  CHECK(std::abs(one.atoms()[0].z[0] - std::exp(cplx(0.0, -0.9 * 1.4)) * cplx(0.3, 0.9)) < 1e-9);

  const auto moved = push_forward(mu, a, q, 0.9);
  CHECK(moved.atoms()[0].weight == 0.4);
  CHECK(moved.atoms()[1].weight == 0.6);
  CHECK(moved.atoms()[1].kind == AtomKind::circle);
  const auto sliced = push_forward(mu, a, q, 0.9, 1e-12, 0.2);
  CHECK((sliced.atoms()[0].z - moved.atoms()[0].z).norm() < 1e-9);

  SUBCASE("circle orbits stay circle orbits") {
    const double t = 1.3;
    const CVector w = rng.complex_vector(2);
    const auto pushed = push_forward(WignerMeasure::circle(w), a, q, t);
    for (int k = 0; k < 16; ++k) {
      const cplx phase = std::exp(cplx(0.0, 2 * std::numbers::pi * k / 16));
      const CVector sample = hartree_flow(phase * w, a, q, t, 1e-12).z_t;
      CHECK((sample - phase * pushed.atoms()[0].z).norm() < 1e-9);
    }
    for (int p = 0; p <= 2; ++p)
      for (int qq = 0; qq <= 2; ++qq) {
        const auto b = oracle::random_symbol(rng, 2, p, qq);
        cplx avg = 0.0;
        for (int k = 0; k < 16; ++k) {
          const cplx phase = std::exp(cplx(0.0, 2 * std::numbers::pi * k / 16));
          avg += eval(b, hartree_flow(phase * w, a, q, t, 1e-12).z_t);
        }
        CHECK(std::abs(avg / 16.0 - measure_expectation(pushed, b)) < 1e-9);
      }
  }
}

TEST_CASE("push-forward against the Dyson series") {
  PortableRng rng(63);
  const CMatrix a = diag2(0.0, 1.0);
  const PolySymbol q = oracle::random_interaction(rng, 2, 0.5);
  CVector z(2);
  z << 1.0, 0.0;
  const auto b = PolySymbol::quadratic(diag2(2.0, 3.0));
  const double t = 0.02;
  const cplx by_flow = measure_expectation(push_forward(WignerMeasure::point(z), a, q, t), b);
  const auto rep = dyson_classical(b, q, a, z, t, 3, 1.0);
  CHECK(std::abs(by_flow - rep.partial_sums[3]) < 1e-9);
}

TEST_CASE("integrate_adaptive") {
  const auto v = integrate_adaptive([](double x) { return cplx(std::cos(x), std::exp(x)); }, 0.0, 2.0, 1e-13);
  CHECK(std::abs(v - cplx(std::sin(2.0), std::exp(2.0) - 1.0)) < 1e-12);
  const auto peaked = integrate_adaptive([](double x) { return cplx(1.0 / (1e-4 + x * x)); }, -1.0, 1.0, 1e-8);
  CHECK(std::abs(peaked.real() - 2.0 / 1e-2 * std::atan(1.0 / 1e-2)) < 1e-7);
  CHECK(integrate_adaptive([](double) { return cplx(1.0); }, 1.0, 1.0, 1e-3) == cplx(0.0));
  CHECK_THROWS_AS(integrate_adaptive([](double x) { return cplx(1.0 / std::sqrt(x)); }, 0.0, 1.0, 1e-14, 20),
                  std::runtime_error);
  CHECK_THROWS_AS(integrate_adaptive([](double x) { return cplx(1.0 / std::abs(x)); }, -1.0, 1.0, 1e-6),
                  std::runtime_error);
}

TEST_CASE("transport_residual") {
  PortableRng rng(64);
  SUBCASE("free dynamics") {
    const CMatrix a = rng.hermitian_matrix(2);
    const auto b = oracle::random_symbol(rng, 2, 1, 1);
    const auto mu = WignerMeasure::point(rng.complex_vector(2));
    CHECK(transport_residual(mu, a, PolySymbol::zero(2, 2, 2), b, 0.7, 1e-10) < 1e-13);
  }
  SUBCASE("one-mode closed form") {
    const PolySymbol b(SymOperator(1, 1, 0, CMatrix::Ones(1, 1)));
    const auto mu = WignerMeasure::point(scalar(1.0));
    CHECK(transport_residual(mu, CMatrix::Zero(1, 1), quartic_1d(), b, 0.8, 1e-8) < 1e-8);
  }
  SUBCASE("random two-mode instance") {
    const CMatrix a = rng.hermitian_matrix(2);
    const PolySymbol q = oracle::random_interaction(rng, 2, 0.5);
    const auto b = oracle::random_symbol(rng, 2, 1, 1);
    CVector z = rng.complex_vector(2);
    z.normalize();
    const WignerMeasure mu({{AtomKind::point, z, 0.5}, {AtomKind::circle, 0.8 * z, 0.5}});
    const double t = 0.5 * radius_t0(1.0, q);
    CHECK(transport_residual(mu, a, q, b, t, 1e-7) < 1e-6);
  }
}

TEST_CASE("fit_order") {
  const std::vector<double> eps{0.25, 0.125, 0.0625};
  CHECK(fit_order(eps, {0.5, 0.25, 0.125}).order == doctest::Approx(1.0));
  CHECK(fit_order(eps, {0.5, 0.125, 0.03125}).order == doctest::Approx(2.0));
  const auto exact = fit_order(eps, {1e-14, 0.0, 3e-13});
  CHECK(exact.exact);
  CHECK(std::isinf(exact.order));
  CHECK_THROWS(fit_order({0.1}, {0.1}));
}

TEST_CASE("default_dictionary") {
  const auto dict = default_dictionary(2);
  CHECK(dict.size() == 36);  // (1 + 2 + 3)^2
  for (const auto& s : dict) {
    CHECK(s.symbol.kernel().matrix.cwiseAbs().sum() == 1.0);
    CHECK(s.symbol.p() <= 2);
    CHECK(s.symbol.q() <= 2);
  }
  CHECK(default_dictionary(1).size() == 9);
}

TEST_CASE("identify_limit") {
  CVector z(2);
  z << cplx(0.6, 0.2), cplx(-0.3, 0.7);
  const std::vector<double> eps{0.25, 0.125, 0.0625, 0.03125};
  const auto dict = default_dictionary(2);

  SUBCASE("coherent family and its point mass") {
    const auto rows = identify_limit([&](double e) { return DensityState(coherent_state(z, e, 1e-15)); }, eps,
                                     WignerMeasure::point(z), dict);
    for (const auto& r : rows) {
      for (double e : r.errors) CHECK(e < 1e-12);
      CHECK(r.fit.exact);
    }
  }
  SUBCASE("Hermite family and the circle orbit") {
    const CVector u = z / z.norm();
    const auto rows = identify_limit(
        [&](double e) { return DensityState(hermite_state(u, static_cast<int>(std::lround(1.0 / e)))); }, eps,
        WignerMeasure::circle(u), dict);
    for (std::size_t k = 0; k < rows.size(); ++k) {
      const auto& s = dict[k].symbol;
      if (s.p() != s.q() || s.p() <= 1) {
        CHECK(rows[k].fit.exact);
      } else {
        CHECK(rows[k].fit.order == doctest::Approx(1.0).epsilon(0.05));
      }
    }
  }
  SUBCASE("wrong candidate is detected") {
    const auto b11 = PolySymbol::quadratic(CMatrix::Identity(2, 2));
    const auto rows = identify_limit([&](double e) { return DensityState(coherent_state(z, e, 1e-15)); }, eps,
                                     WignerMeasure::point(2.0 * z), {{"number", b11}});
    for (double e : rows[0].errors) CHECK(e == doctest::Approx(3.0 * z.squaredNorm()).epsilon(1e-9));
    CHECK_FALSE(rows[0].fit.exact);
  }
}
