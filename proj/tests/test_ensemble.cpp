#include "statper/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "doctest.h"
#include "statper/maps.hpp"

using namespace statper;

namespace {

// Occupancy grid with the listed cells marked at count 1.
OccupancyGrid grid_with_cells(const Grid& g, const std::vector<int>& cells) {
  OccupancyGrid occ;
  occ.grid = g;
  occ.min_count = 1;
  occ.counts.assign(size_t(g.cells()), 0);
  occ.occupied.assign(size_t(g.cells()), false);
  for (int c : cells) {
    occ.counts[size_t(c)] = 1;
    occ.occupied[size_t(c)] = true;
  }
  return occ;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

int cycle_lcm(const std::vector<int>& perm) {
  int period = 1;
  std::vector<bool> seen(perm.size(), false);
  for (size_t i = 0; i < perm.size(); ++i) {
    if (seen[i]) continue;
    int len = 0;
    for (size_t j = i; !seen[j]; j = size_t(perm[j])) {
      seen[j] = true;
      ++len;
    }
    period = std::lcm(period, len);
  }
  return period;
}

}  // namespace

TEST_CASE("lattice cloud is a deterministic grid of cell centers") {
  PointCloud c = lattice_cloud(4, 2.0);
  REQUIRE(c.points.size() == 16);
  CHECK(c.escaped_count == 0);
  double lo = 1e9, hi = -1e9;
  for (const Point2& p : c.points) {
    lo = std::min({lo, p.x, p.y});
    hi = std::max({hi, p.x, p.y});
  }
  CHECK(lo == doctest::Approx(-1.5).epsilon(1e-14));
  CHECK(hi == doctest::Approx(1.5).epsilon(1e-14));

  PointCloud again = lattice_cloud(4, 2.0);
  for (size_t i = 0; i < c.points.size(); ++i) {
    CHECK(c.points[i].x == again.points[i].x);
    CHECK(c.points[i].y == again.points[i].y);
  }

  PointCloud one = lattice_cloud(1, 3.0);
  REQUIRE(one.points.size() == 1);
  CHECK(one.points[0].x == doctest::Approx(0.0));
  CHECK(one.points[0].y == doctest::Approx(0.0));
}

TEST_CASE("iterating zero steps leaves the cloud untouched") {
  PointCloud c = lattice_cloud(5, 1.0);
  auto shove = [](Point2 p) { return Point2{p.x + 100.0, p.y}; };
  PointCloud out = iterate_cloud(c, shove, 0, 2.0);
  REQUIRE(out.points.size() == c.points.size());
  CHECK(out.escaped_count == 0);
  for (size_t i = 0; i < c.points.size(); ++i) {
    CHECK(out.points[i].x == c.points[i].x);
    CHECK(out.points[i].y == c.points[i].y);
  }
}

TEST_CASE("one step of the switched map sends the origin to (1, 0)") {
  MapParams p(0.57, 1.1);
  PointCloud c;
  c.points.push_back({0.0, 0.0});
  PointCloud out = iterate_cloud(
      c, [&p](Point2 v) { return switched_map(v, p); }, 1, 50.0);
  REQUIRE(out.points.size() == 1);
  CHECK(out.escaped_count == 0);
  CHECK(out.points[0].x == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(out.points[0].y == doctest::Approx(0.0));
}

TEST_CASE("escapes are counted, never stored") {
  auto drift = [](Point2 p) { return Point2{p.x + 3.0, p.y}; };
  PointCloud c;
  c.points = {{0.0, 0.0}, {1.0, 0.0}, {2.5, 0.0}};

  PointCloud one = iterate_cloud(c, drift, 1, 4.0);
  CHECK(one.points.size() == 2);
  CHECK(one.escaped_count == 1);

  PointCloud two = iterate_cloud(c, drift, 2, 4.0);
  CHECK(two.points.empty());
  CHECK(two.escaped_count == 3);

  auto poison = [](Point2) { return Point2{std::nan(""), 0.0}; };
  PointCloud sick = iterate_cloud(c, poison, 1, 4.0);
  CHECK(sick.points.empty());
  CHECK(sick.escaped_count == 3);
}

TEST_CASE("almost every point escapes in the unstable-node regime") {
  MapParams p(2.5, 1.2);
  PointCloud c = lattice_cloud(100, 5.0);
  PointCloud out = iterate_cloud(
      c, [&p](Point2 v) { return switched_map(v, p); }, 100, 50.0);
  CHECK(out.points.size() + size_t(out.escaped_count) == 10000);
  CHECK(double(out.escaped_count) / 10000.0 > 0.99);
}

TEST_CASE("occupancy tallies points into cells") {
  Grid g = Grid::rect(0.0, 1.0, 0.0, 1.0, 4, 4);

  PointCloud empty;
  OccupancyGrid none = occupancy(empty, g, 1);
  for (int i = 0; i < g.cells(); ++i) CHECK_FALSE(none.occupied[size_t(i)]);

  PointCloud single;
  single.points.push_back({0.1, 0.1});
  OccupancyGrid one = occupancy(single, g, 1);
  int marked = 0;
  for (int i = 0; i < g.cells(); ++i) marked += one.occupied[size_t(i)] ? 1 : 0;
  CHECK(marked == 1);
  CHECK(one.counts[0] == 1);

  // min_count thresholds the tally; points off the grid are ignored.
  PointCloud pair;
  pair.points = {{0.1, 0.1}, {0.1, 0.1}, {5.0, 5.0}};
  OccupancyGrid thresholded = occupancy(pair, g, 2);
  marked = 0;
  for (int i = 0; i < g.cells(); ++i) marked += thresholded.occupied[size_t(i)] ? 1 : 0;
  CHECK(marked == 1);
  CHECK(thresholded.counts[0] == 2);
  OccupancyGrid strict = occupancy(single, g, 2);
  for (int i = 0; i < g.cells(); ++i) CHECK_FALSE(strict.occupied[size_t(i)]);
}

TEST_CASE("connected components on simple patterns") {
  Grid g = Grid::rect(0.0, 1.0, 0.0, 1.0, 8, 8);

  std::vector<int> all(64);
  for (int i = 0; i < 64; ++i) all[size_t(i)] = i;
  LabeledComponents whole = connected_components(grid_with_cells(g, all), 8, 20);
  CHECK(whole.count() == 1);
  CHECK(whole.cells[0].size() == 64);

  // Opposite corner cells never touch.
  LabeledComponents corners =
      connected_components(grid_with_cells(g, {0, 63}), 4, 1);
  CHECK(corners.count() == 2);

  // Diagonal contact joins under 8-connectivity only.
  OccupancyGrid diag = grid_with_cells(g, {0, 9});
  CHECK(connected_components(diag, 8, 1).count() == 1);
  CHECK(connected_components(diag, 4, 1).count() == 2);

  // Speckle below min_cells is dropped and left unlabeled.
  OccupancyGrid speckled = grid_with_cells(g, {0, 1, 8, 9, 63});
  LabeledComponents blob = connected_components(speckled, 4, 2);
  CHECK(blob.count() == 1);
  CHECK(blob.label[63] == -1);
  CHECK(blob.label[0] == 0);

  CHECK_THROWS_AS(connected_components(grid_with_cells(g, {0, 63}), 4, 3),
                  EmptySupportError);
}

TEST_CASE("a single component maps to itself") {
  Grid g = Grid::rect(0.0, 1.0, 0.0, 1.0, 8, 8);
  std::vector<int> all(64);
  for (int i = 0; i < 64; ++i) all[size_t(i)] = i;
  LabeledComponents comps = connected_components(grid_with_cells(g, all), 8, 20);
  SupportCycle cycle =
      component_permutation(comps, [](Point2 p) { return p; });
  REQUIRE(cycle.permutation.size() == 1);
  CHECK(cycle.permutation[0] == 0);
  CHECK(cycle.period == 1);
}

TEST_CASE("component votes follow the map") {
  SUBCASE("two blocks swapping") {
    Grid g = Grid::rect(0.0, 2.0, 0.0, 1.0, 16, 8);
    std::vector<int> cells(size_t(g.cells()));
    for (int i = 0; i < g.cells(); ++i) cells[size_t(i)] = i;
    LabeledComponents comps;
    {
      OccupancyGrid occ = grid_with_cells(g, cells);
      // Cut the middle column pair to split the strip into two blocks.
      for (int iy = 0; iy < 8; ++iy) {
        occ.occupied[size_t(iy) * 16 + 7] = false;
        occ.occupied[size_t(iy) * 16 + 8] = false;
        occ.counts[size_t(iy) * 16 + 7] = 0;
        occ.counts[size_t(iy) * 16 + 8] = 0;
      }
      comps = connected_components(occ, 8, 20);
    }
    REQUIRE(comps.count() == 2);
    auto swap_blocks = [](Point2 p) {
      return Point2{p.x < 1.0 ? p.x + 1.0 : p.x - 1.0, p.y};
    };
    SupportCycle cycle = component_permutation(comps, swap_blocks);
    CHECK(cycle.period == 2);
    CHECK(cycle.permutation[0] == 1);
    CHECK(cycle.permutation[1] == 0);
  }

  SUBCASE("three blocks cycling") {
    Grid g = Grid::rect(0.0, 3.0, 0.0, 1.0, 24, 8);
    OccupancyGrid occ = grid_with_cells(g, {});
    for (int iy = 0; iy < 8; ++iy) {
      for (int ix = 0; ix < 24; ++ix) {
        if (ix % 8 == 7) continue;  // one-column moats between blocks
        occ.occupied[size_t(iy) * 24 + size_t(ix)] = true;
        occ.counts[size_t(iy) * 24 + size_t(ix)] = 1;
      }
    }
    LabeledComponents comps = connected_components(occ, 8, 20);
    REQUIRE(comps.count() == 3);
    auto rotate = [](Point2 p) {
      return Point2{p.x < 2.0 ? p.x + 1.0 : p.x - 2.0, p.y};
    };
    SupportCycle cycle = component_permutation(comps, rotate);
    CHECK(cycle.period == 3);
    std::vector<int> expect = {1, 2, 0};
    CHECK(cycle.permutation == expect);
  }

  SUBCASE("a two-cycle beside a three-cycle compounds to six") {
    Grid g = Grid::rect(0.0, 5.0, 0.0, 1.0, 40, 8);
    OccupancyGrid occ = grid_with_cells(g, {});
    for (int iy = 0; iy < 8; ++iy) {
      for (int ix = 0; ix < 40; ++ix) {
        if (ix % 8 == 7) continue;
        occ.occupied[size_t(iy) * 40 + size_t(ix)] = true;
        occ.counts[size_t(iy) * 40 + size_t(ix)] = 1;
      }
    }
    LabeledComponents comps = connected_components(occ, 8, 20);
    REQUIRE(comps.count() == 5);
    auto shuffle = [](Point2 p) {
      int block = int(std::floor(p.x));
      double frac = p.x - double(block);
      static const int to[5] = {1, 0, 3, 4, 2};
      return Point2{double(to[block]) + frac, p.y};
    };
    SupportCycle cycle = component_permutation(comps, shuffle);
    CHECK(cycle.period == 6);
    CHECK(cycle_lcm(cycle.permutation) == 6);
    std::vector<int> expect = {1, 0, 3, 4, 2};
    CHECK(cycle.permutation == expect);
  }
}

namespace {

// Occupancy over a two-row strip: the listed columns are filled in both rows.
OccupancyGrid strip_with_columns(const Grid& g, const std::vector<int>& columns) {
  std::vector<int> cells;
  for (int ix : columns) {
    cells.push_back(ix);
    cells.push_back(g.nx() + ix);
  }
  return grid_with_cells(g, cells);
}

}  // namespace

TEST_CASE("votes landing in a sampling hole snap to the nearest labeled cell") {
  Grid g = Grid::rect(0.0, 8.0, 0.0, 1.0, 8, 2);
  LabeledComponents comps =
      connected_components(strip_with_columns(g, {0, 1, 2, 5, 6, 7}), 8, 3);
  REQUIRE(comps.count() == 2);
  // The left block's first cell lands in the unoccupied cell 4, one ring
  // away from the right block; without snapping its majority would be 2/3.
  auto across = [](Point2 p) {
    return Point2{p.x < 3.0 ? p.x + 4.2 : p.x - 4.8, p.y};
  };
  SupportCycle cycle = component_permutation(comps, across);
  CHECK(cycle.period == 2);
  CHECK(cycle.permutation[0] == 1);
  CHECK(cycle.permutation[1] == 0);
}

TEST_CASE("transient debris is pruned from the cycle") {
  Grid g = Grid::rect(0.0, 12.0, 0.0, 1.0, 12, 2);
  LabeledComponents comps = connected_components(
      strip_with_columns(g, {0, 1, 2, 4, 5, 6, 9, 10, 11}), 8, 3);
  REQUIRE(comps.count() == 3);
  // Blocks one and two swap; the third shoots far off-grid every step.
  auto mixed = [](Point2 p) {
    if (p.x < 3.0) return Point2{p.x + 4.0, p.y};
    if (p.x < 8.0) return Point2{p.x - 4.0, p.y};
    return Point2{p.x - 100.0, p.y};
  };
  SupportCycle cycle = component_permutation(comps, mixed);
  CHECK(cycle.period == 2);
  CHECK(cycle.components.count() == 2);
  CHECK(cycle.components.label[9] == -1);
  CHECK(cycle.components.label[0] >= 0);
}

TEST_CASE("coherent splinters merge back into one region") {
  Grid g = Grid::rect(0.0, 16.0, 0.0, 1.0, 16, 2);
  LabeledComponents comps = connected_components(
      strip_with_columns(g, {0, 1, 2, 3, 5, 6, 7, 8, 11, 12, 13, 14, 15}), 8, 4);
  REQUIRE(comps.count() == 3);
  // The two left blocks are halves of one region: both map wholly into the
  // right block, whose return votes split between the halves.
  auto weave = [](Point2 p) {
    if (p.x < 4.5) return Point2{p.x + 12.0, p.y};
    if (p.x < 10.0) return Point2{p.x + 7.0, p.y};
    static const double back[5] = {2.5, 6.5, 0.5, 7.5, 3.5};
    return Point2{back[int(std::floor(p.x)) - 11], p.y};
  };
  SupportCycle cycle = component_permutation(comps, weave);
  CHECK(cycle.period == 2);
  CHECK(cycle.components.count() == 2);
  CHECK(cycle.components.cells[0].size() + cycle.components.cells[1].size() == 26);
}

TEST_CASE("a component splitting its vote is ambiguous") {
  Grid g = Grid::rect(0.0, 16.0, 0.0, 1.0, 16, 2);
  LabeledComponents comps = connected_components(
      strip_with_columns(g, {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 12, 13, 14, 15}), 8, 4);
  REQUIRE(comps.count() == 2);
  // Six tenths of the big block reaches the small one; the rest vanishes
  // beyond any snap radius. No repair can read that as a clean permutation.
  auto leaky = [](Point2 p) {
    if (p.x < 6.0) return Point2{13.5, p.y};
    if (p.x < 10.0) return Point2{-100.0, p.y};
    return Point2{p.x - 8.0, p.y};
  };
  CHECK_THROWS_WITH_AS(component_permutation(comps, leaky),
                       doctest::Contains("splits its vote"),
                       AmbiguousPermutationError);
}

TEST_CASE("five regions cycle for alpha 0.57") {
  EnsembleSettings s;
  s.cloud_side = 300;
  s.grid_nx = 256;
  s.grid_ny = 256;
  double escaped = -1.0;
  SupportCycle cycle = detect_support_cycle(MapParams(0.57, 1.1), s, &escaped);
  CHECK(cycle.period == 5);
  CHECK(cycle.components.count() == 5);
  // Most of the initial box lies outside the attractor's basin; what matters
  // is that the survivors carry the cycle and divergence is not declared.
  CHECK(escaped >= 0.0);
  CHECK(escaped < 0.99);

  std::vector<int> sorted = cycle.permutation;
  std::sort(sorted.begin(), sorted.end());
  std::vector<int> expect = {0, 1, 2, 3, 4};
  CHECK(sorted == expect);
  CHECK(cycle_lcm(cycle.permutation) == 5);

  CHECK(detect_period(MapParams(0.57, 1.1), s) == 5);
}

TEST_CASE("a fixed region coexists with a three-cycle at negative alpha") {
  EnsembleSettings s;
  s.cloud_side = 300;
  s.grid_nx = 256;
  s.grid_ny = 256;
  SupportCycle cycle = detect_support_cycle(MapParams(-0.75, 1.1), s);
  CHECK(cycle.period == 3);
  CHECK(cycle.components.count() >= 3);
  CHECK(cycle_lcm(cycle.permutation) == 3);
}

TEST_CASE("divergence raises with the escaped fraction attached") {
  EnsembleSettings s;
  s.cloud_side = 100;
  s.grid_nx = 64;
  s.grid_ny = 64;
  try {
    detect_support_cycle(MapParams(2.5, 1.2), s);
    FAIL("expected DivergenceError");
  } catch (const DivergenceError& e) {
    CHECK(e.escaped_fraction() > 0.99);
  }
}

TEST_CASE("period scan marks failing rows instead of throwing") {
  EnsembleSettings s;
  s.cloud_side = 100;
  s.grid_nx = 64;
  s.grid_ny = 64;

  std::vector<ScanRow> bad = period_scan(1.2, 2.4, 2.5, 0.05, s);
  REQUIRE(bad.size() == 3);
  CHECK(bad[0].alpha == doctest::Approx(2.4));
  CHECK(bad[1].alpha == doctest::Approx(2.45));
  CHECK(bad[2].alpha == doctest::Approx(2.5));
  for (const ScanRow& r : bad) {
    CHECK(r.status == ScanStatus::Divergent);
    CHECK(r.period == -1);
    CHECK(r.escaped_fraction > 0.99);
  }

  EnsembleSettings fine = s;
  fine.cloud_side = 300;
  fine.grid_nx = 256;
  fine.grid_ny = 256;
  std::vector<ScanRow> good = period_scan(1.1, 0.57, 0.57, 0.1, fine);
  REQUIRE(good.size() == 1);
  CHECK(good[0].status == ScanStatus::Ok);
  CHECK(good[0].period == 5);
  CHECK(good[0].component_count == 5);

  EnsembleSettings starved = fine;
  starved.min_cells = 1000000000;
  std::vector<ScanRow> empty = period_scan(1.1, 0.57, 0.57, 0.1, starved);
  REQUIRE(empty.size() == 1);
  CHECK(empty[0].status == ScanStatus::EmptySupport);

  // Same settings, same table.
  std::vector<ScanRow> rerun = period_scan(1.1, 0.57, 0.57, 0.1, fine);
  CHECK(rerun[0].period == good[0].period);
  CHECK(rerun[0].component_count == good[0].component_count);
  CHECK(rerun[0].escaped_fraction == good[0].escaped_fraction);
}

TEST_CASE("long cycles near the period-9/13 boundary need a fine grid") {
  // Periods in the fifties and seventies pack neighbouring bands a few cells
  // apart; 2048 cells per axis keeps them separate at the default cloud size.
  EnsembleSettings s;
  s.grid_nx = 2048;
  s.grid_ny = 2048;

  std::vector<ScanRow> a = period_scan(1.02, 0.322, 0.322, 1.0, s);
  REQUIRE(a.size() == 1);
  CHECK(a[0].status == ScanStatus::Ok);
  CHECK(a[0].period == 58);

  std::vector<ScanRow> b = period_scan(1.02, 0.328, 0.328, 1.0, s);
  REQUIRE(b.size() == 1);
  CHECK(b[0].status == ScanStatus::Ok);
  CHECK(b[0].period == 76);
}

TEST_CASE("attractor-fitted operator and the occupancy tap") {
  UlamOperator op = attractor_ulam(MapParams(0.57, 1.1), 48, 40);
  CHECK(op.grid.nx() == 48);
  CHECK(op.grid.ny() == 40);
  CHECK(op.samples_per_cell == 16);
  CHECK(op.seed == 1);
  // The burned-in box sits well inside the escape bound.
  CHECK(op.grid.x_lo() > -50.0);
  CHECK(op.grid.x_hi() < 50.0);

  UlamOperator again = attractor_ulam(MapParams(0.57, 1.1), 48, 40);
  CHECK(again.weight == op.weight);
  CHECK(again.col == op.col);

  EnsembleSettings s;
  s.cloud_side = 300;
  s.grid_nx = 256;
  s.grid_ny = 256;
  OccupancyGrid occ;
  SupportCycle cycle = detect_support_cycle(MapParams(0.57, 1.1), s, nullptr, &occ);
  REQUIRE(occ.counts.size() == size_t(256 * 256));
  CHECK(occ.grid.nx() == 256);
  long tallied = 0;
  for (int c : occ.counts) tallied += c;
  // Every labeled component cell was cut from this very tally.
  long labeled = 0;
  for (const auto& cells : cycle.components.cells) labeled += long(cells.size());
  CHECK(tallied > 0);
  CHECK(labeled <= long(std::count(occ.occupied.begin(), occ.occupied.end(), true)));
}

TEST_CASE("occupancy writers produce the documented formats") {
  Grid g = Grid::rect(0.0, 3.0, 0.0, 2.0, 3, 2);
  PointCloud c;
  c.points = {{0.5, 0.5}, {2.5, 1.5}, {2.5, 1.5}};
  OccupancyGrid occ = occupancy(c, g, 1);

  write_occupancy_pgm(occ, "ensemble_writer_probe.pgm");
  CHECK(slurp("ensemble_writer_probe.pgm") ==
        "P2\n3 2\n255\n0 0 255\n128 0 0\n");
  std::remove("ensemble_writer_probe.pgm");

  write_occupancy_csv(occ, "ensemble_writer_probe.csv");
  CHECK(slurp("ensemble_writer_probe.csv") == "ix,iy,count\n0,0,1\n2,1,2\n");
  std::remove("ensemble_writer_probe.csv");

  std::vector<ScanRow> rows(2);
  rows[0] = {0.5, ScanStatus::Ok, 5, 5, 0.25};
  rows[1] = {0.55, ScanStatus::Divergent, -1, 0, 1.0};
  write_scan_csv(rows, "ensemble_scan_probe.csv");
  CHECK(slurp("ensemble_scan_probe.csv") ==
        "alpha,status,period,components,escaped_fraction\n"
        "0.5,ok,5,5,0.25\n"
        "0.55,divergent,,,1\n");
  std::remove("ensemble_scan_probe.csv");
}
