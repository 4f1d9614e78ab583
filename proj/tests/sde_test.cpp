#include <doctest.h>

#include <cmath>
#include <numbers>

#include "stefan/errors.hpp"
#include "stefan/reduce.hpp"
#include "stefan/sde.hpp"

using namespace stefan;

namespace {
constexpr double kPi = std::numbers::pi;

SimConfig heat2d() {
  SimConfig c;
  c.basis = {2, 16, 64};
  c.phys = PhysicalParams{1, 1, 1, 1, 0.0, 0.05, 1.0, 0.05, 1.0, 0.1};
  c.noise = {0, 0.0, 2.0};
  c.t_final = 0.01;
  c.dt = 1e-5;
  c.ic = {InitialCondition::Kind::mode, 0, 1.0, 1, 1, 0.1, ""};
  c.save_every = 100;
  return c;
}

SimConfig slab2d() {
  SimConfig c;
  c.basis = {2, 16, 64};
  c.phys = PhysicalParams{};
  c.noise = {32, 0.5, 2.0};
  c.t_final = 0.05;
  c.dt = 0.0;
  c.ic = {InitialCondition::Kind::slab, 0, 1.0, 1.0, 1.0, 0.1, ""};
  c.save_every = 50;
  return c;
}

}  // namespace

TEST_CASE("drift of the heat reduction is diagonal decay") {
  SimConfig cfg = heat2d();
  Simulation sim(cfg);
  SpectralScratch ws;
  const int n = sim.basis().num_modes();
  std::vector<double> c(n, 0.0), out(n);
  c[5] = 0.7;
  sim.system().drift(c, out, ws);
  for (int j = 0; j < n; ++j) {
    const double expect = j == 5 ? -sim.basis().eigenvalue(5) * 0.7 : 0.0;
    CHECK(out[j] == doctest::Approx(expect).epsilon(1e-10));
  }

  // X = 0 has zero drift (Psi(0) = 0, g(temp(0)) stays 0)
  std::fill(c.begin(), c.end(), 0.0);
  sim.system().drift(c, out, ws);
  for (double v : out) CHECK(std::fabs(v) < 1e-14);
}

TEST_CASE("drift is affine in the source term") {
  SimConfig cfg = heat2d();
  Simulation sim(cfg);
  const int n = sim.basis().num_modes();
  std::vector<double> f1(n, 0.0), f2(n, 0.0);
  f1[2] = 0.4;
  f2[7] = -1.1;
  std::vector<double> f12(n, 0.0);
  for (int j = 0; j < n; ++j) f12[j] = f1[j] + f2[j];
  GalerkinSystem s1(sim.basis(), sim.model(), sim.noise(), f1);
  GalerkinSystem s2(sim.basis(), sim.model(), sim.noise(), f12);
  SpectralScratch ws;
  std::vector<double> c(n, 0.0), o1(n), o2(n);
  c[0] = 0.3;
  s1.drift(c, o1, ws);
  s2.drift(c, o2, ws);
  for (int j = 0; j < n; ++j)
    CHECK(o2[j] - o1[j] == doctest::Approx(f2[j]).epsilon(1e-14));

  // forced linear case: drift(0) = F
  std::fill(c.begin(), c.end(), 0.0);
  s2.drift(c, o2, ws);
  for (int j = 0; j < n; ++j) CHECK(o2[j] == doctest::Approx(f12[j]).epsilon(1e-13));
}

TEST_CASE("diffusion vanishes below the cutoff and with zero amplitude") {
  SimConfig cfg = slab2d();
  Simulation sim(cfg);
  SpectralScratch ws;
  const int n = sim.basis().num_modes();
  std::vector<std::vector<double>> df;
  // cold state: temperature everywhere below the cutoff
  std::vector<double> c(n, 0.0);
  c[0] = -0.5;
  sim.system().diffusion(c, df, ws);
  for (const auto& row : df)
    for (double v : row) CHECK(std::fabs(v) < 1e-14);

  SimConfig quiet = slab2d();
  quiet.noise.alpha0 = 0.0;
  quiet.noise.num_modes = 0;
  Simulation sim0(quiet);
  sim0.system().diffusion(c, df, ws);
  CHECK(df.empty());
}

TEST_CASE("projection contracts the diffusion fields") {
  SimConfig cfg = slab2d();
  Simulation sim(cfg);
  SpectralScratch ws;
  std::vector<double> c(sim.initial_coeffs().begin(), sim.initial_coeffs().end());
  std::vector<std::vector<double>> df;
  sim.system().diffusion(c, df, ws);

  // pre-projection Hilbert-Schmidt mass on the grid
  const Basis& b = sim.basis();
  const int G = b.grid_size();
  std::vector<double> xf(G), eta(G), g1(G), g2(G), prod(G);
  b.synthesize(c, xf, ws);
  for (int i = 0; i < G; ++i)
    eta[i] = sim.model().transport_cutoff(sim.model().temperature(xf[i]));
  b.gradient(eta, g1, g2, ws);
  double pre = 0.0, post = 0.0;
  for (int k = 0; k < sim.noise().num_modes(); ++k) {
    const auto s1 = sim.noise().sigma1(k);
    const auto s2 = sim.noise().sigma2(k);
    for (int i = 0; i < G; ++i) {
      const double v = sim.noise().alpha(k) * (s1[i] * g1[i] + s2[i] * g2[i]);
      prod[i] = v * v;
    }
    pre += b.h() * b.h() * sum_pairwise(prod);
    post += dot_pairwise(df[k].data(), df[k].data(), df[k].size());
  }
  CHECK(post <= pre * (1 + 1e-12));
}

TEST_CASE("stable_dt formula") {
  SimConfig cfg;
  cfg.basis = {1, 16, 64};
  cfg.phys = PhysicalParams{1, 1, 1, 1, 0.0, 0.05, 1.0, 0.05, 1.0, 0.1};
  cfg.noise = {0, 0.0, 2.0};
  cfg.ic = {InitialCondition::Kind::mode, 0, 1.0, 1, 1, 0.1, ""};
  Simulation sim(cfg);
  CHECK(sim.system().stable_dt() ==
        doctest::Approx(0.5 / (256 * kPi * kPi + 1.0)).epsilon(1e-14));

  // removing the noise term can only enlarge the bound
  SimConfig noisy = slab2d();
  Simulation snoisy(noisy);
  SimConfig quiet = slab2d();
  quiet.noise.alpha0 = 0.0;
  quiet.noise.num_modes = 0;
  Simulation squiet(quiet);
  CHECK(snoisy.system().stable_dt() <= squiet.system().stable_dt());
}

TEST_CASE("single deterministic step of the heat reduction") {
  SimConfig cfg = heat2d();
  Simulation sim(cfg);
  SpectralScratch ws;
  const int n = sim.basis().num_modes();
  std::vector<double> state(n, 0.0);
  state[0] = 1.0;
  const double dt = 1e-5;
  CHECK(sim.system().step_em(state, dt, {}, ws));
  CHECK(state[0] == doctest::Approx(1.0 - sim.basis().eigenvalue(0) * dt).epsilon(1e-12));
}

TEST_CASE("heat kernel oracle: final coefficient matches exp(-2 pi^2 T)") {
  Simulation sim(heat2d());
  Trajectory tr = sim.simulate_path(0);
  CHECK(!tr.blew_up);
  const double expect = std::exp(-2 * kPi * kPi * 0.01);
  CHECK(std::fabs(tr.states.back()[0] - expect) / expect <= 1e-3);
}

TEST_CASE("1D heat reduction decays with the 1D eigenvalue") {
  SimConfig cfg;
  cfg.basis = {1, 16, 64};
  cfg.phys = PhysicalParams{1, 1, 1, 1, 0.0, 0.05, 1.0, 0.05, 1.0, 0.1};
  cfg.noise = {0, 0.0, 2.0};
  cfg.t_final = 0.01;
  cfg.dt = 1e-5;
  cfg.ic = {InitialCondition::Kind::mode, 0, 1.0, 1, 1, 0.1, ""};
  cfg.save_every = 1000;
  Simulation sim(cfg);
  Trajectory tr = sim.simulate_path(0);
  const double expect = std::exp(-kPi * kPi * 0.01);
  CHECK(std::fabs(tr.states.back()[0] - expect) / expect <= 1e-3);
}

TEST_CASE("Richardson order of the deterministic scheme") {
  SimConfig cfg = heat2d();
  cfg.t_final = 0.005;
  cfg.dt = 4e-5;
  const double exact = std::exp(-2 * kPi * kPi * cfg.t_final);
  Simulation s1(cfg);
  const double e1 = std::fabs(s1.simulate_path(0).states.back()[0] - exact);
  cfg.dt = 2e-5;
  Simulation s2(cfg);
  const double e2 = std::fabs(s2.simulate_path(0).states.back()[0] - exact);
  CHECK(e1 / e2 == doctest::Approx(2.0).epsilon(0.15));
}

TEST_CASE("deterministic slab run dissipates the L2 norm") {
  SimConfig cfg = slab2d();
  cfg.noise.alpha0 = 0.0;
  cfg.noise.num_modes = 0;
  cfg.t_final = 0.02;
  Simulation sim(cfg);
  Trajectory tr = sim.simulate_path(0);
  CHECK(!tr.blew_up);
  double prev = 1e300;
  for (const auto& st : tr.states) {
    const double e = Basis::norm_l2(st);
    CHECK(e <= prev * (1 + 1e-12));
    prev = e;
  }
}

TEST_CASE("Stratonovich correction drift equals the explicit sigma-outer-product form") {
  // linear cutoff variant: eta'(theta) = 1 wherever the state lives, enthalpy
  // reduced to the identity, so grad g(temp(X)) = grad X / 2 pointwise.
  SimConfig cfg;
  cfg.basis = {2, 16, 64};
  cfg.phys = PhysicalParams{1, 1, 1, 1, 0.0, 1e-12, 1.0, 0.05, 1.0, 0.1};
  cfg.noise = {8, 0.5, 2.0};
  cfg.ic = {InitialCondition::Kind::mode, 0, 1.0, 1, 1, 0.1, ""};
  Simulation sim(cfg);
  const Basis& b = sim.basis();
  const NoiseModel& nz = sim.noise();
  SpectralScratch ws;
  const int n = b.num_modes();
  const int G = b.grid_size();
  std::vector<double> c(n, 0.0);
  c[0] = 1.0;

  // correction term as the system computes it = drift minus the flux part
  std::vector<double> drift(n), flux(n), xf(G), work(G);
  sim.system().drift(c, drift, ws);
  b.synthesize(c, xf, ws);
  for (int i = 0; i < G; ++i) work[i] = sim.model().flux_potential(xf[i]);
  b.project(work, flux, ws);
  std::vector<double> corr(n);
  for (int j = 0; j < n; ++j) corr[j] = drift[j] + b.eigenvalue(j) * flux[j];

  // explicit route: (1/2) sum_k alpha_k^2 project(div[sigma_k (x) sigma_k P_n grad X])
  std::vector<double> g1(G), g2(G), hat(n), v1(G), v2(G), u1(G), u2(G), d1(G);
  b.gradient_of_coeffs(c, g1, g2, ws);
  b.project(g1, hat, ws);
  b.synthesize(hat, v1, ws);
  b.project(g2, hat, ws);
  b.synthesize(hat, v2, ws);
  std::vector<double> expect(n, 0.0);
  std::fill(u1.begin(), u1.end(), 0.0);
  std::fill(u2.begin(), u2.end(), 0.0);
  for (int k = 0; k < nz.num_modes(); ++k) {
    const double a2 = 0.5 * nz.alpha(k) * nz.alpha(k);
    const auto s1 = nz.sigma1(k);
    const auto s2 = nz.sigma2(k);
    for (int i = 0; i < G; ++i) {
      const double dot = s1[i] * v1[i] + s2[i] * v2[i];
      u1[i] += a2 * s1[i] * dot;
      u2[i] += a2 * s2[i] * dot;
    }
  }
  b.gradient(u1, g1, g2, ws);
  d1 = g1;
  b.gradient(u2, g1, g2, ws);
  for (int i = 0; i < G; ++i) d1[i] += g2[i];
  b.project(d1, expect, ws);

  double worst = 0.0;
  for (int j = 0; j < n; ++j) worst = std::max(worst, std::fabs(corr[j] - expect[j]));
  CHECK(worst <= 1e-8);
}

TEST_CASE("simulate is a pure function of (config, seed); threads do not matter") {
  SimConfig cfg = slab2d();
  cfg.t_final = 0.005;
  cfg.paths = 4;
  Simulation sim(cfg);
  const auto a = sim.simulate_ensemble(1);
  const auto b = sim.simulate_ensemble(8);
  REQUIRE(a.size() == b.size());
  for (std::size_t p = 0; p < a.size(); ++p) {
    REQUIRE(a[p].states.size() == b[p].states.size());
    CHECK(a[p].dw == b[p].dw);
    for (std::size_t s = 0; s < a[p].states.size(); ++s)
      CHECK(a[p].states[s] == b[p].states[s]);
  }
  // distinct paths get distinct driving noise
  CHECK(a[0].dw != a[1].dw);
}

TEST_CASE("replay reproduces a run bit-exactly and flags injected blow-up") {
  SimConfig cfg = slab2d();
  cfg.t_final = 0.005;
  Simulation sim(cfg);
  Trajectory tr = sim.simulate_path(0);
  Trajectory re = sim.replay(tr.dw, 0);
  REQUIRE(re.states.size() == tr.states.size());
  for (std::size_t s = 0; s < tr.states.size(); ++s) CHECK(re.states[s] == tr.states[s]);

  std::vector<double> bad(tr.dw.size(), 1e308);
  Trajectory boom = sim.replay(bad, 0);
  CHECK(boom.blew_up);
  CHECK(boom.blowup_step >= 0);
}

TEST_CASE("dt above the stability bound is rejected") {
  SimConfig cfg = slab2d();
  cfg.dt = 1.0;
  CHECK_THROWS_AS(Simulation{cfg}, ConfigError);
}

TEST_CASE("drift and diffusion outputs already live in the retained span") {
  SimConfig cfg = slab2d();
  Simulation sim(cfg);
  SpectralScratch ws;
  const Basis& b = sim.basis();
  const int n = b.num_modes();
  std::vector<double> c(sim.initial_coeffs().begin(), sim.initial_coeffs().end());
  std::vector<double> dr(n), grid(b.grid_size()), back(n);
  sim.system().drift(c, dr, ws);
  b.synthesize(dr, grid, ws);
  b.project(grid, back, ws);
  double worst = 0.0;
  for (int j = 0; j < n; ++j) worst = std::max(worst, std::fabs(back[j] - dr[j]));
  CHECK(worst <= 1e-10 * (1.0 + Basis::norm_l2(dr)));
}
