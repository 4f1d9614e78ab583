#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "stefan/errors.hpp"
#include "stefan/reduce.hpp"
#include "stefan/spectral.hpp"

using namespace stefan;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("eigenvalues and closed forms") {
  Basis b2({2, 8, 16});
  // first 2D mode is (1,1)
  CHECK(b2.modes()[0].k1 == 1);
  CHECK(b2.modes()[0].k2 == 1);
  CHECK(b2.eigenvalue(0) == doctest::Approx(2 * kPi * kPi).epsilon(1e-14));
  CHECK(b2.eigenfunction_at(0, 0.5, 0.5) == doctest::Approx(2.0).epsilon(1e-14));

  Basis b1({1, 8, 16});
  CHECK(b1.eigenfunction_at(2, 0.5) == doctest::Approx(-std::sqrt(2.0)).epsilon(1e-14));

  // ordering invariant + bijection
  for (int j = 0; j + 1 < b2.num_modes(); ++j) CHECK(b2.eigenvalue(j) <= b2.eigenvalue(j + 1));
  std::set<std::pair<int, int>> seen;
  for (const Mode& mo : b2.modes()) CHECK(seen.insert({mo.k1, mo.k2}).second);
  CHECK(static_cast<int>(seen.size()) == 64);
}

TEST_CASE("transform round trip is exact to 1e-12") {
  Basis b({2, 8, 16});
  SpectralScratch ws;
  std::vector<double> c(b.num_modes(), 0.0), grid(b.grid_size()), back(b.num_modes());

  c[3] = 1.0;
  b.synthesize(c, grid, ws);
  b.project(grid, back, ws);
  for (int j = 0; j < b.num_modes(); ++j)
    CHECK(back[j] == doctest::Approx(c[j]).epsilon(1e-12));

  std::mt19937_64 rng(42);
  std::normal_distribution<double> n01;
  for (auto& v : c) v = n01(rng);
  b.synthesize(c, grid, ws);
  b.project(grid, back, ws);
  double worst = 0.0;
  for (int j = 0; j < b.num_modes(); ++j) worst = std::max(worst, std::fabs(back[j] - c[j]));
  CHECK(worst <= 1e-12);

  std::fill(grid.begin(), grid.end(), 0.0);
  b.project(grid, back, ws);
  for (double v : back) CHECK(v == 0.0);
}

TEST_CASE("eigenfunctions are L2-normalized under the grid quadrature") {
  Basis b({2, 6, 16});
  SpectralScratch ws;
  std::vector<double> grid(b.grid_size()), c(b.num_modes());
  for (int j = 0; j < b.num_modes(); ++j) {
    b.eigenfunction(j, grid);
    std::vector<double> sq(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) sq[i] = grid[i] * grid[i];
    const double q = b.h() * b.h() * sum_pairwise(sq);
    CHECK(q == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("laplacian acts diagonally; gradient closed form") {
  Basis b({2, 8, 16});
  std::vector<double> c(b.num_modes(), 0.0), out(b.num_modes());
  c[0] = 1.0;
  b.apply_laplacian(c, out);
  CHECK(out[0] == doctest::Approx(-2 * kPi * kPi).epsilon(1e-14));

  // grad e_(1,1) vanishes at the center
  NodeEval nev(b, 15);  // nodes at i/16, includes (1/2, 1/2)
  std::vector<double> g1(nev.grid_size()), g2(nev.grid_size());
  nev.gradient(c, g1, g2);
  const int P = nev.nodes_per_axis();
  const int mid = P / 2;
  CHECK(std::fabs(g1[mid * P + mid]) < 1e-12);
  CHECK(std::fabs(g2[mid * P + mid]) < 1e-12);
}

TEST_CASE("Green identity oracle: trapezoid of |grad e_j|^2 equals lambda_j") {
  Basis b({2, 4, 16});
  NodeEval nev(b, 63);
  std::vector<double> c(b.num_modes(), 0.0);
  std::vector<double> g1(nev.grid_size()), g2(nev.grid_size()), sq(nev.grid_size());
  for (int j = 0; j < b.num_modes(); ++j) {
    std::fill(c.begin(), c.end(), 0.0);
    c[j] = 1.0;
    nev.gradient(c, g1, g2);
    for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = g1[i] * g1[i] + g2[i] * g2[i];
    CHECK(nev.trapezoid(sq) == doctest::Approx(b.eigenvalue(j)).epsilon(1e-8));
  }
}

TEST_CASE("pseudo-spectral gradient is exact on band-limited fields") {
  Basis b({2, 8, 32});
  SpectralScratch ws;
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n01;
  std::vector<double> c(b.num_modes());
  for (auto& v : c) v = n01(rng);
  std::vector<double> grid(b.grid_size()), g1(b.grid_size()), g2(b.grid_size());
  std::vector<double> e1(b.grid_size()), e2(b.grid_size());
  b.synthesize(c, grid, ws);
  b.gradient(grid, g1, g2, ws);
  b.gradient_of_coeffs(c, e1, e2, ws);
  double worst = 0.0;
  for (std::size_t i = 0; i < g1.size(); ++i)
    worst = std::max({worst, std::fabs(g1[i] - e1[i]), std::fabs(g2[i] - e2[i])});
  CHECK(worst < 1e-9);
}

TEST_CASE("norms from coefficients") {
  Basis b({2, 4, 8});
  std::vector<double> c(b.num_modes(), 0.0);
  // c = 1 on (1,1) and (1,2)
  int j12 = -1;
  for (int j = 0; j < b.num_modes(); ++j)
    if (b.modes()[j].k1 == 1 && b.modes()[j].k2 == 2) j12 = j;
  c[0] = 1.0;
  c[j12] = 1.0;
  const double h1m = b.norm_h_minus(c, 1.0);
  CHECK(h1m * h1m ==
        doctest::Approx(1.0 / (2 * kPi * kPi) + 1.0 / (5 * kPi * kPi)).epsilon(1e-13));

  // single coefficient: |c| / lambda^{beta/2}
  std::fill(c.begin(), c.end(), 0.0);
  c[j12] = -2.0;
  CHECK(b.norm_h_minus(c, 5.0) ==
        doctest::Approx(2.0 / std::pow(5 * kPi * kPi, 2.5)).epsilon(1e-13));
  CHECK(b.norm_h1(c) == doctest::Approx(2.0 * std::sqrt(5.0) * kPi).epsilon(1e-13));

  std::fill(c.begin(), c.end(), 0.0);
  CHECK(Basis::norm_l2(c) == 0.0);
  CHECK(b.norm_h1(c) == 0.0);
  CHECK(b.norm_h_minus(c, 2.0) == 0.0);
}

TEST_CASE("norm ordering across the scale") {
  Basis b({2, 6, 12});
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n01;
  std::vector<double> c(b.num_modes());
  const double lam1 = b.eigenvalue(0);
  for (int rep = 0; rep < 50; ++rep) {
    for (auto& v : c) v = n01(rng);
    const double beta = 3.0;
    const double hm = b.norm_h_minus(c, beta);
    const double h1m = b.norm_h_minus(c, 1.0);
    CHECK(hm <= std::pow(lam1, (1.0 - beta) / 2.0) * h1m * (1 + 1e-12));
    CHECK(h1m <= Basis::norm_l2(c) / std::sqrt(lam1) * (1 + 1e-12));
  }
}

TEST_CASE("Parseval against grid quadrature") {
  Basis b({2, 8, 16});
  SpectralScratch ws;
  std::mt19937_64 rng(21);
  std::normal_distribution<double> n01;
  std::vector<double> c(b.num_modes()), grid(b.grid_size());
  for (auto& v : c) v = n01(rng);
  b.synthesize(c, grid, ws);
  std::vector<double> sq(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) sq[i] = grid[i] * grid[i];
  const double quad = b.h() * b.h() * sum_pairwise(sq);
  const double coef = Basis::norm_l2(c);
  CHECK(quad == doctest::Approx(coef * coef).epsilon(1e-10));
}

TEST_CASE("sup-norm constant of the eigenfunctions is j-independent") {
  Basis b({2, 8, 32});
  std::vector<double> grid(b.grid_size());
  double cmax = 0.0;
  for (int j = 0; j < b.num_modes(); ++j) {
    b.eigenfunction(j, grid);
    double sup = 0.0;
    for (double v : grid) sup = std::max(sup, std::fabs(v));
    CHECK(sup <= 2.0 + 1e-12);  // closed-form bound on the square
    cmax = std::max(cmax, sup / b.eigenvalue(j));
  }
  CHECK(std::isfinite(cmax));
  // the generic |e|_inf <= C lambda bound holds with the measured C = 2/lambda_1
  CHECK(cmax <= 2.0 / b.eigenvalue(0) + 1e-12);
}

TEST_CASE("spec validation") {
  CHECK_THROWS_AS(Basis({3, 4, 8}), ConfigError);
  CHECK_THROWS_AS(Basis({2, 8, 15}), ConfigError);  // M < 2m
  Basis ok({1, 4, 8});
  CHECK(ok.grid_size() == 8);
}
