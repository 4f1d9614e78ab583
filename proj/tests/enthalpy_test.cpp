#include <doctest.h>

#include <cmath>
#include <random>

#include "stefan/enthalpy.hpp"
#include "stefan/errors.hpp"

using namespace stefan;

namespace {

PhysicalParams heat_params() {
  PhysicalParams p;
  p.c1 = p.c2 = p.k1 = p.k2 = 1.0;
  p.latent_heat = 0.0;
  p.psi_floor = 1.0;
  return p;
}

PhysicalParams default_params() { return PhysicalParams{}; }

// 64-point Gauss-Legendre on [a,b]; the independent quadrature oracle for the
// closed-form integrals of the smoothstep family.
double gauss_legendre(double a, double b, const auto& f) {
  static std::vector<double> x, w;
  if (x.empty()) {
    const int n = 64;
    x.resize(n);
    w.resize(n);
    for (int i = 0; i < n; ++i) {
      double xi = std::cos(M_PI * (i + 0.75) / (n + 0.5));
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = xi;
        for (int k = 2; k <= n; ++k) {
          const double pk = ((2 * k - 1) * xi * p1 - (k - 1) * p0) / k;
          p0 = p1;
          p1 = pk;
        }
        const double dp = n * (xi * p1 - p0) / (xi * xi - 1.0);
        const double step = p1 / dp;
        xi -= step;
        if (std::fabs(step) < 1e-15) break;
      }
      x[i] = xi;
      double p0 = 1.0, p1 = xi;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2 * k - 1) * xi * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      const double dp = n * (xi * p1 - p0) / (xi * xi - 1.0);
      w[i] = 2.0 / ((1.0 - xi * xi) * dp * dp);
    }
  }
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    s += w[i] * f(0.5 * (b - a) * x[i] + 0.5 * (a + b));
  return 0.5 * (b - a) * s;
}

}  // namespace

TEST_CASE("enthalpy map: ramp endpoints and branches") {
  PhysicalParams p;
  p.c1 = p.c2 = 1.0;
  p.latent_heat = 0.0;
  p.psi_floor = 0.5;
  EnthalpyModel id(p);
  CHECK(id.enthalpy(2.5) == doctest::Approx(2.5).epsilon(1e-14));

  p.latent_heat = 1.0;
  p.mush_width = 0.1;
  EnthalpyModel ramp(p);
  CHECK(ramp.enthalpy(-0.1) == doctest::Approx(-0.1).epsilon(1e-14));
  CHECK(ramp.enthalpy(0.1) == doctest::Approx(1.1).epsilon(1e-14));

  p.c1 = 2.0;
  p.c2 = 1.0;
  p.mush_width = 0.05;
  EnthalpyModel solid(p);
  CHECK(solid.enthalpy(-1.0) == doctest::Approx(-2.0).epsilon(1e-14));
  // liquid branch is exactly c2 r + l above the ramp
  CHECK(solid.enthalpy(2.0) == doctest::Approx(1.0 * 2.0 + 1.0).epsilon(1e-14));
}

TEST_CASE("inverse enthalpy: identity model and ramp endpoint") {
  PhysicalParams p;
  p.c1 = p.c2 = 1.0;
  p.latent_heat = 0.0;
  p.psi_floor = 1.0;
  EnthalpyModel id(p);
  CHECK(id.temperature(-3.7) == doctest::Approx(-3.7).epsilon(1e-13));

  p.latent_heat = 1.0;
  p.mush_width = 0.1;
  p.psi_floor = 0.05;
  EnthalpyModel ramp(p);
  CHECK(ramp.temperature(1.1) == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("inverse enthalpy round-trip against bisection oracle") {
  PhysicalParams p;
  p.c1 = 2.0;
  p.c2 = 1.0;
  p.latent_heat = 1.0;
  p.mush_width = 0.05;
  p.psi_floor = 0.05;
  EnthalpyModel m(p);
  // independent bisection oracle
  auto bisect = [&](double x) {
    double lo = -10, hi = 10;
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      (m.enthalpy(mid) < x ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  };
  CHECK(m.temperature(m.enthalpy(0.3)) == doctest::Approx(0.3).epsilon(1e-10));
  CHECK(m.temperature(m.enthalpy(0.3)) == doctest::Approx(bisect(m.enthalpy(0.3))).epsilon(1e-10));

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> dist(-4.0, 5.0);
  for (int i = 0; i < 10000; ++i) {
    const double r = dist(rng);
    CHECK(m.temperature(m.enthalpy(r)) == doctest::Approx(r).epsilon(1e-10));
  }
}

TEST_CASE("flux potential: branches, plateau, null at zero") {
  PhysicalParams p;
  p.k1 = 2.0;
  p.c1 = 1.0;
  p.k2 = 1.0;
  p.c2 = 1.0;
  p.psi_floor = 0.01;
  p.blend_width = 0.1;
  p.latent_heat = 1.0;
  EnthalpyModel m(p);
  CHECK(m.flux_potential(0.0) == 0.0);
  CHECK(std::fabs(m.flux_potential(-2.0) - (-4.0)) <= (p.k1 / p.c1) * p.blend_width);
  // plateau carries only the floor slope
  CHECK(m.flux_potential(0.5) == doctest::Approx(0.01 * 0.5).epsilon(1e-14));
  CHECK(m.flux_potential_slope(-10.0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(m.flux_potential_slope(0.5) == doctest::Approx(0.01).epsilon(1e-14));
}

TEST_CASE("flux potential slope consistent with central differences") {
  EnthalpyModel m(default_params());
  const double h = 1e-5, x = 0.37;
  const double fd = (m.flux_potential(x + h) - m.flux_potential(x - h)) / (2 * h);
  CHECK(fd == doctest::Approx(m.flux_potential_slope(x)).epsilon(1e-6));
}

TEST_CASE("transport cutoff: dead zone, saturation, midpoint integral") {
  EnthalpyModel m(default_params());
  const double e = m.params().eta_cutoff;
  const double L = m.params().eta_lipschitz;
  CHECK(m.transport_cutoff(-5.0) == 0.0);
  CHECK(m.transport_cutoff(e / 2) == 0.0);
  CHECK(m.transport_cutoff_slope(3 * e) == doctest::Approx(L).epsilon(1e-14));
  // quintic smoothstep has mean 1/2 over the rise
  CHECK(m.transport_cutoff(2 * e) == doctest::Approx(L * e / 2).epsilon(1e-14));
}

TEST_CASE("correction potential: dead zone, linear region, quadrature oracle") {
  EnthalpyModel m(default_params());
  const double e = m.params().eta_cutoff;
  const double L = m.params().eta_lipschitz;
  CHECK(m.correction_potential(0.0) == 0.0);
  CHECK(m.correction_potential(e) == 0.0);
  // theta >= 2e: slope is exactly L^2/2
  const double g2e = m.correction_potential(2 * e);
  CHECK(m.correction_potential(0.7) ==
        doctest::Approx(g2e + 0.5 * L * L * (0.7 - 2 * e)).epsilon(1e-13));
  // 64-point Gauss-Legendre oracle for g(2e) = 1/2 int_0^{2e} eta'(r)^2 dr
  const double oracle =
      gauss_legendre(0.0, 2 * e, [&](double r) {
        const double ep = m.transport_cutoff_slope(r);
        return 0.5 * ep * ep;
      });
  CHECK(g2e == doctest::Approx(oracle).epsilon(1e-12));
  // chain rule: g' = eta'^2/2 by central differences
  for (double th : {0.06, 0.08, 0.11, 0.4}) {
    const double h = 1e-6;
    const double fd = (m.correction_potential(th + h) - m.correction_potential(th - h)) / (2 * h);
    CHECK(fd == doctest::Approx(m.correction_potential_slope(th)).epsilon(1e-6));
  }
}

TEST_CASE("strict monotonicity of the flux potential on random pairs") {
  EnthalpyModel m(default_params());
  const double psi0 = m.params().psi_floor;
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> dist(-3.0, 4.0);
  for (int i = 0; i < 2000; ++i) {
    const double x = dist(rng), y = dist(rng);
    if (x == y) continue;
    const double lhs = (m.flux_potential(x) - m.flux_potential(y)) * (x - y);
    CHECK(lhs >= psi0 * (x - y) * (x - y) - 1e-10);
  }
}

TEST_CASE("hypothesis validator passes defaults and rejects bad configs") {
  EnthalpyModel m(default_params());
  const ModelValidation v = m.validate_hypotheses(-8.0, 8.0);
  CHECK(v.pass);

  PhysicalParams bad = default_params();
  bad.c2 = 0.5;  // inverse slope would exceed 1
  CHECK_THROWS_AS(EnthalpyModel{bad}, ConfigError);

  PhysicalParams bad2 = default_params();
  bad2.psi_floor = 2.0 * std::min(bad2.k1 / bad2.c1, bad2.k2 / bad2.c2);
  CHECK_THROWS_AS(EnthalpyModel{bad2}, ConfigError);
}

TEST_CASE("heat reduction collapses both maps to the identity") {
  EnthalpyModel m(heat_params());
  for (double x : {-3.0, -0.2, 0.0, 0.4, 2.0}) {
    CHECK(m.enthalpy(x) == doctest::Approx(x).epsilon(1e-14));
    CHECK(m.flux_potential(x) == doctest::Approx(x).epsilon(1e-14));
    CHECK(m.flux_potential_slope(x) == 1.0);
  }
}
