#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <numeric>
#include <random>
#include <vector>

#include "doctest.h"
#include "statper/maps.hpp"
#include "statper/transfer.hpp"

using namespace statper;

namespace {

// Hand-rolled permutation operator on a 1D grid: row i sends all mass to
// cell sigma(i).
UlamOperator permutation_operator(const std::vector<int>& sigma) {
  int n = int(sigma.size());
  UlamOperator op;
  op.grid = Grid::interval(0.0, 1.0, n);
  op.row_start.assign(size_t(n) + 1, 0);
  op.escaped_mass.assign(size_t(n), 0.0);
  for (int i = 0; i < n; ++i) {
    op.col.push_back(sigma[size_t(i)]);
    op.weight.push_back(1.0);
    op.row_start[size_t(i) + 1] = i + 1;
  }
  return op;
}

int permutation_order(const std::vector<int>& sigma) {
  int n = int(sigma.size());
  std::vector<bool> seen(size_t(n), false);
  long long order = 1;
  for (int i = 0; i < n; ++i) {
    if (seen[size_t(i)]) continue;
    int len = 0;
    for (int j = i; !seen[size_t(j)]; j = sigma[size_t(j)]) {
      seen[size_t(j)] = true;
      ++len;
    }
    order = std::lcm(order, (long long)len);
  }
  return int(order);
}

}  // namespace

TEST_CASE("grid indexing and geometry") {
  Grid g = Grid::rect(-1.0, 1.0, 0.0, 4.0, 4, 8);
  CHECK(g.cells() == 32);
  CHECK(g.cell_width() == doctest::Approx(0.5));
  CHECK(g.cell_height() == doctest::Approx(0.5));
  CHECK(g.cell_area() == doctest::Approx(0.25));
  CHECK(g.cell_index({-1.0, 0.0}) == 0);
  CHECK(g.cell_index({-0.75, 0.25}) == 0);
  CHECK(g.cell_index({0.99, 3.99}) == 31);
  // Upper edges belong to the last cell instead of escaping.
  CHECK(g.cell_index({1.0, 4.0}) == 31);
  CHECK(g.cell_index({1.01, 0.0}) == -1);
  CHECK(g.cell_index({0.0, -0.01}) == -1);
  Point2 c = g.cell_center(0);
  CHECK(c.x == doctest::Approx(-0.75));
  CHECK(c.y == doctest::Approx(0.25));

  Grid line = Grid::interval(0.0, 2.0, 10);
  CHECK(line.one_dimensional());
  CHECK(line.cell_index({0.35, 0.5}) == 1);

  CHECK_THROWS_AS(Grid::rect(0.0, 0.0, 0.0, 1.0, 4, 4), InvalidArgument);
  CHECK_THROWS_AS(Grid::rect(0.0, 1.0, 0.0, 1.0, 1, 4), InvalidArgument);
  CHECK_THROWS_AS(Grid::interval(0.0, 1.0, 1), InvalidArgument);
}

TEST_CASE("identity map gives the identity table") {
  Grid g = Grid::rect(0.0, 1.0, 0.0, 1.0, 5, 5);
  UlamOperator op = build_ulam([](Point2 v) { return v; }, g, 16, 42);
  for (int i = 0; i < g.cells(); ++i) {
    REQUIRE(op.row_start[size_t(i) + 1] - op.row_start[size_t(i)] == 1);
    CHECK(op.col[size_t(op.row_start[size_t(i)])] == i);
    CHECK(op.weight[size_t(op.row_start[size_t(i)])] == 1.0);
    CHECK(op.escaped_mass[size_t(i)] == 0.0);
  }
  DensityVector f = uniform_density(g);
  DensityVector pf = apply(op, f);
  CHECK(l1_distance(g, f, pf) == 0.0);
}

TEST_CASE("full-height hat on two cells is exact") {
  Grid g = Grid::interval(0.0, 1.0, 2);
  UlamOperator op = build_ulam_1d([](double x) { return hat_map(x, 2.0); }, g, 16, 7);
  // Each half maps onto the whole interval, so both rows split evenly; the
  // strata make the split exact, not just approximate.
  for (int i = 0; i < 2; ++i) {
    REQUIRE(op.row_start[size_t(i) + 1] - op.row_start[size_t(i)] == 2);
    CHECK(op.weight[size_t(op.row_start[size_t(i)])] == 0.5);
    CHECK(op.weight[size_t(op.row_start[size_t(i)]) + 1] == 0.5);
    CHECK(op.escaped_mass[size_t(i)] == 0.0);
  }

  DensityVector uniform = uniform_density(g);
  DensityVector pushed = apply(op, uniform);
  CHECK(l1_distance(g, uniform, pushed) < 1e-15);

  DensityVector star = stationary_density(op, 1e-12, 10000);
  CHECK(l1_distance(g, star, uniform) < 1e-12);
}

TEST_CASE("uniform density is stationary for the full-height hat at finer grids") {
  Grid g = Grid::interval(0.0, 1.0, 64);
  UlamOperator op = build_ulam_1d([](double x) { return hat_map(x, 2.0); }, g, 16, 3);
  for (int i = 0; i < g.cells(); ++i) {
    CHECK(op.escaped_mass[size_t(i)] == 0.0);
  }
  DensityVector star = stationary_density(op, 1e-10, 100000);
  CHECK(l1_distance(g, star, uniform_density(g)) < 1e-9);
}

TEST_CASE("apply conserves mass and rejects mismatched sizes") {
  Grid g = Grid::rect(-2.0, 2.0, -2.0, 2.0, 8, 8);
  MapParams p(0.57, 1.1);
  UlamOperator op = build_ulam([&](Point2 v) { return switched_map(v, p); }, g, 16, 11);

  // Row sums plus escape account for every sample.
  for (int i = 0; i < g.cells(); ++i) {
    double s = op.escaped_mass[size_t(i)];
    for (std::int64_t k = op.row_start[size_t(i)]; k < op.row_start[size_t(i) + 1]; ++k) {
      s += op.weight[size_t(k)];
      CHECK(op.weight[size_t(k)] >= 0.0);
    }
    CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
  }

  DensityVector f = uniform_density(g);
  double mass_in = l1_norm(g, f);
  DensityVector out = apply(op, f);
  double escaped = 0.0;
  for (int i = 0; i < g.cells(); ++i) {
    escaped += op.escaped_mass[size_t(i)] * f.values[size_t(i)] * g.cell_area();
  }
  CHECK(l1_norm(g, out) == doctest::Approx(mass_in - escaped).epsilon(1e-12));
  for (double v : out.values) CHECK(v >= 0.0);

  DensityVector bad{std::vector<double>(7, 1.0)};
  CHECK_THROWS_AS(apply(op, bad), InvalidArgument);
}

TEST_CASE("non-finite images abort the build naming the cell") {
  Grid g = Grid::rect(0.0, 1.0, 0.0, 1.0, 4, 4);
  auto broken = [](Point2 v) -> Point2 {
    if (v.x > 0.5) return {std::nan(""), 0.0};
    return v;
  };
  CHECK_THROWS_WITH_AS(build_ulam(broken, g, 4, 1),
                       doctest::Contains("non-finite image from cell"), NumericalError);
}

TEST_CASE("fully escaping map yields empty rows") {
  Grid g = Grid::rect(0.0, 1.0, 0.0, 1.0, 3, 3);
  UlamOperator op = build_ulam([](Point2) { return Point2{50.0, 50.0}; }, g, 9, 5);
  for (int i = 0; i < g.cells(); ++i) {
    CHECK(op.escaped_mass[size_t(i)] == 1.0);
    CHECK(op.row_start[size_t(i) + 1] == op.row_start[size_t(i)]);
  }
  DensityVector out = apply(op, uniform_density(g));
  CHECK(l1_norm(g, out) == 0.0);
}

TEST_CASE("permutation operators expose their cycle structure") {
  // 3-cycle: third roots of unity, period 3.
  {
    PeripheralSpectrum s = peripheral_spectrum(permutation_operator({1, 2, 0}));
    CHECK(s.matched_count == 3);
    CHECK(s.period == 3);
    CHECK(s.eigenvalues.size() == 3);
    for (const PeripheralEigenvalue& e : s.eigenvalues) {
      CHECK(e.modulus == doctest::Approx(1.0).epsilon(1e-10));
      CHECK(e.matched);
    }
  }
  // Identity on 4 cells: eigenvalue 1 with full multiplicity.
  {
    PeripheralSpectrum s = peripheral_spectrum(permutation_operator({0, 1, 2, 3}));
    CHECK(s.matched_count == 4);
    CHECK(s.period == 1);
    for (const PeripheralEigenvalue& e : s.eigenvalues) CHECK(e.root_order == 1);
  }
  // 2-cycle x 3-cycle: period 6 although no single orbit has length 6.
  {
    PeripheralSpectrum s = peripheral_spectrum(permutation_operator({1, 0, 3, 4, 2}));
    CHECK(s.matched_count == 5);
    CHECK(s.period == 6);
  }
}

TEST_CASE("every permutation of up to 8 cells matches its group order") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 40; ++trial) {
    int n = 2 + int(rng() % 7);
    std::vector<int> sigma(static_cast<size_t>(n));
    std::iota(sigma.begin(), sigma.end(), 0);
    std::shuffle(sigma.begin(), sigma.end(), rng);
    PeripheralSpectrum s = peripheral_spectrum(permutation_operator(sigma));
    CHECK(s.matched_count == n);
    CHECK(s.period == permutation_order(sigma));
  }
}

TEST_CASE("spectral cycle of a cyclic permutation returns the basis densities") {
  UlamOperator op = permutation_operator({1, 2, 0});
  DensityVector start = indicator_density(op.grid, 0);
  std::vector<DensityVector> cycle = spectral_cycle(op, 3, start, 510, 9, 1e-12);
  REQUIRE(cycle.size() == 3);
  for (int j = 0; j < 3; ++j) {
    DensityVector expected = indicator_density(op.grid, j);
    CHECK(l1_distance(op.grid, cycle[size_t(j)], expected) < 1e-12);
  }
  // Wrong cycle length cannot close.
  CHECK_THROWS_AS(spectral_cycle(op, 2, start, 510, 10, 1e-3), NumericalError);
}

TEST_CASE("tent band law") {
  CHECK(tent_expected_period(2.0) == 1);
  CHECK(tent_expected_period(1.5) == 1);
  CHECK(tent_expected_period(1.3) == 2);
  CHECK(tent_expected_period(1.15) == 4);
  CHECK(tent_expected_period(1.1) == 4);
  // Band edges: inclusive above, exclusive below.
  double quarter_root = std::pow(2.0, 0.25);
  CHECK(tent_expected_period(quarter_root) == 4);
  CHECK(tent_expected_period(quarter_root + 1e-9) == 2);
  CHECK(tent_expected_period(std::pow(2.0, 0.5) + 1e-9) == 1);
  CHECK_THROWS_AS(tent_expected_period(1.0), InvalidArgument);
  CHECK_THROWS_AS(tent_expected_period(2.1), InvalidArgument);
}

TEST_CASE("tent operator spectrum agrees with the band law") {
  // Strictly inside the period-2 band.
  double beta = 1.3;
  double lo = 1.0 - beta * beta, hi = beta + 1.0;
  Grid g = Grid::interval(lo, hi, 400);
  MapParams p(0.0, beta);
  UlamOperator op = build_ulam_1d([&](double x) { return tent(x, p); }, g, 16, 17);
  for (int i = 0; i < g.cells(); ++i) CHECK(op.escaped_mass[size_t(i)] == 0.0);

  PeripheralSpectrum s = peripheral_spectrum(op);
  CHECK(s.period == tent_expected_period(beta));
  bool has_minus_one = false;
  for (const PeripheralEigenvalue& e : s.eigenvalues) {
    if (e.matched && e.root_order == 2) has_minus_one = true;
  }
  CHECK(has_minus_one);
}

TEST_CASE("cesaro orbit settles where the direct orbit cycles") {
  UlamOperator op = permutation_operator({1, 2, 0});
  ConvergenceReport r = convergence_diagnostics(op, indicator_density(op.grid, 0), 90);
  REQUIRE(r.direct_orbit.size() == 90);
  // The direct orbit keeps revisiting the same distance from the flat
  // average; the running average contracts toward it.
  CHECK(r.direct_orbit.back() > 1.0);
  CHECK(r.cesaro_orbit.back() < 0.05);
  CHECK(r.cesaro_orbit.back() < r.cesaro_orbit.front());
}

TEST_CASE("operator round-trips through the text format") {
  Grid g = Grid::rect(-5.0, 5.0, -5.0, 1.0, 12, 10);
  MapParams p(0.57, 1.1);
  UlamOperator op = build_ulam([&](Point2 v) { return switched_map(v, p); }, g, 16, 23);

  std::string path = "ulam_roundtrip_test.op";
  save_operator(op, path);
  UlamOperator back = load_operator(path);
  std::remove(path.c_str());

  CHECK(back.grid.nx() == op.grid.nx());
  CHECK(back.grid.ny() == op.grid.ny());
  CHECK(back.grid.x_lo() == op.grid.x_lo());
  CHECK(back.grid.y_hi() == op.grid.y_hi());
  CHECK(back.seed == op.seed);
  CHECK(back.samples_per_cell == op.samples_per_cell);
  REQUIRE(back.row_start == op.row_start);
  REQUIRE(back.col == op.col);
  CHECK(back.weight == op.weight);
  CHECK(back.escaped_mass == op.escaped_mass);
}

TEST_CASE("stationary density reports non-convergence with the residual") {
  // A slowly mixing two-state chain with an uneven stationary split cannot
  // settle from the uniform start in under a hundred steps.
  UlamOperator op;
  op.grid = Grid::interval(0.0, 1.0, 2);
  op.row_start = {0, 2, 4};
  op.col = {0, 1, 0, 1};
  op.weight = {0.999, 0.001, 0.002, 0.998};
  op.escaped_mass = {0.0, 0.0};
  CHECK_THROWS_AS(stationary_density(op, 1e-10, 100), NumericalError);
  try {
    stationary_density(op, 1e-10, 100);
  } catch (const NumericalError& e) {
    CHECK(e.residual() > 0.0);
  }
  // With room to iterate it lands on the 2:1 split.
  DensityVector star = stationary_density(op, 1e-10, 2000000);
  CHECK(star.values[0] / star.values[1] == doctest::Approx(2.0).epsilon(1e-5));
}
