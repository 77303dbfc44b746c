#include "statper/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace statper {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double uniform01(std::uint64_t& state) {
  return double(splitmix64(state) >> 11) * 0x1.0p-53;
}

std::uint64_t cell_stream(std::uint64_t seed, int cell) {
  return seed ^ (0x9e3779b97f4a7c15ULL * std::uint64_t(cell + 1));
}

}  // namespace

Grid Grid::rect(double x0, double x1, double y0, double y1, int nx, int ny) {
  if (!(x1 > x0) || !(y1 > y0) || !std::isfinite(x0) || !std::isfinite(x1) ||
      !std::isfinite(y0) || !std::isfinite(y1)) {
    throw InvalidArgument("Grid::rect: bounds must be finite with positive extent");
  }
  if (nx < 2 || ny < 2) throw InvalidArgument("Grid::rect: need at least 2 cells per axis");
  Grid g;
  g.x0_ = x0;
  g.x1_ = x1;
  g.y0_ = y0;
  g.y1_ = y1;
  g.nx_ = nx;
  g.ny_ = ny;
  return g;
}

Grid Grid::interval(double x0, double x1, int nx) {
  if (!(x1 > x0) || !std::isfinite(x0) || !std::isfinite(x1)) {
    throw InvalidArgument("Grid::interval: bounds must be finite with positive extent");
  }
  if (nx < 2) throw InvalidArgument("Grid::interval: need at least 2 cells");
  Grid g;
  g.x0_ = x0;
  g.x1_ = x1;
  g.y0_ = 0.0;
  g.y1_ = 1.0;
  g.nx_ = nx;
  g.ny_ = 1;
  return g;
}

int Grid::cell_index(Point2 v) const {
  if (!(v.x >= x0_ && v.x <= x1_ && v.y >= y0_ && v.y <= y1_)) return -1;
  int ix = int((v.x - x0_) / cell_width());
  int iy = int((v.y - y0_) / cell_height());
  if (ix >= nx_) ix = nx_ - 1;
  if (iy >= ny_) iy = ny_ - 1;
  return iy * nx_ + ix;
}

Point2 Grid::cell_center(int index) const {
  int ix = index % nx_;
  int iy = index / nx_;
  return {x0_ + (ix + 0.5) * cell_width(), y0_ + (iy + 0.5) * cell_height()};
}

DensityVector uniform_density(const Grid& grid) {
  double total = (grid.x_hi() - grid.x_lo()) * (grid.y_hi() - grid.y_lo());
  return {std::vector<double>(size_t(grid.cells()), 1.0 / total)};
}

DensityVector indicator_density(const Grid& grid, int cell) {
  if (cell < 0 || cell >= grid.cells()) {
    throw InvalidArgument("indicator_density: cell index out of range");
  }
  DensityVector f{std::vector<double>(size_t(grid.cells()), 0.0)};
  f.values[size_t(cell)] = 1.0 / grid.cell_area();
  return f;
}

double l1_norm(const Grid& grid, const DensityVector& f) {
  double s = 0.0;
  for (double v : f.values) s += std::fabs(v);
  return s * grid.cell_area();
}

double l1_distance(const Grid& grid, const DensityVector& a, const DensityVector& b) {
  if (a.values.size() != b.values.size()) {
    throw InvalidArgument("l1_distance: dimension mismatch");
  }
  double s = 0.0;
  for (size_t i = 0; i < a.values.size(); ++i) s += std::fabs(a.values[i] - b.values[i]);
  return s * grid.cell_area();
}

namespace {

// Shared assembly: walk every cell, draw its samples, count destinations.
UlamOperator assemble(const Grid& grid, int samples_per_cell, std::uint64_t seed,
                      const std::function<void(int, std::uint64_t&, std::vector<int>&)>& sample_cell) {
  UlamOperator op;
  op.grid = grid;
  op.seed = seed;
  op.samples_per_cell = samples_per_cell;
  int n = grid.cells();
  op.row_start.assign(size_t(n) + 1, 0);
  op.escaped_mass.assign(size_t(n), 0.0);

  std::vector<int> dests;
  for (int i = 0; i < n; ++i) {
    std::uint64_t stream = cell_stream(seed, i);
    dests.clear();
    sample_cell(i, stream, dests);

    int escaped = 0;
    std::sort(dests.begin(), dests.end());
    size_t k = 0;
    while (k < dests.size() && dests[k] < 0) {
      ++escaped;
      ++k;
    }
    double inv = 1.0 / double(dests.size());
    while (k < dests.size()) {
      size_t run = k + 1;
      while (run < dests.size() && dests[run] == dests[k]) ++run;
      op.col.push_back(dests[k]);
      op.weight.push_back(double(run - k) * inv);
      k = run;
    }
    op.escaped_mass[size_t(i)] = double(escaped) * inv;
    op.row_start[size_t(i) + 1] = std::int64_t(op.col.size());
  }
  return op;
}

}  // namespace

UlamOperator build_ulam(const std::function<Point2(Point2)>& map, const Grid& grid,
                        int samples_per_cell, std::uint64_t seed) {
  if (samples_per_cell < 1) throw InvalidArgument("build_ulam: samples_per_cell must be >= 1");
  int side = 1;
  while (side * side < samples_per_cell) ++side;

  double w = grid.cell_width(), h = grid.cell_height();
  return assemble(grid, side * side, seed,
                  [&](int i, std::uint64_t& stream, std::vector<int>& dests) {
                    Point2 corner{grid.x_lo() + (i % grid.nx()) * w,
                                  grid.y_lo() + (i / grid.nx()) * h};
                    for (int sy = 0; sy < side; ++sy) {
                      for (int sx = 0; sx < side; ++sx) {
                        Point2 v{corner.x + (sx + uniform01(stream)) * w / side,
                                 corner.y + (sy + uniform01(stream)) * h / side};
                        Point2 image = map(v);
                        if (!is_finite(image)) {
                          throw NumericalError("build_ulam: non-finite image from cell " +
                                               std::to_string(i));
                        }
                        dests.push_back(grid.cell_index(image));
                      }
                    }
                  });
}

UlamOperator build_ulam_1d(const std::function<double(double)>& map, const Grid& grid,
                           int samples_per_cell, std::uint64_t seed) {
  if (samples_per_cell < 1) throw InvalidArgument("build_ulam_1d: samples_per_cell must be >= 1");
  if (!grid.one_dimensional()) throw InvalidArgument("build_ulam_1d: grid is not 1D");

  double w = grid.cell_width();
  double y_mid = 0.5 * (grid.y_lo() + grid.y_hi());
  return assemble(grid, samples_per_cell, seed,
                  [&](int i, std::uint64_t& stream, std::vector<int>& dests) {
                    double corner = grid.x_lo() + i * w;
                    for (int s = 0; s < samples_per_cell; ++s) {
                      double x = corner + (s + uniform01(stream)) * w / samples_per_cell;
                      double image = map(x);
                      if (!std::isfinite(image)) {
                        throw NumericalError("build_ulam_1d: non-finite image from cell " +
                                             std::to_string(i));
                      }
                      dests.push_back(grid.cell_index({image, y_mid}));
                    }
                  });
}

DensityVector apply(const UlamOperator& op, const DensityVector& f) {
  size_t n = size_t(op.grid.cells());
  if (f.values.size() != n) throw InvalidArgument("apply: dimension mismatch");
  DensityVector out{std::vector<double>(n, 0.0)};
  for (size_t i = 0; i < n; ++i) {
    double fi = f.values[i];
    if (fi == 0.0) continue;
    for (std::int64_t k = op.row_start[i]; k < op.row_start[i + 1]; ++k) {
      out.values[size_t(op.col[size_t(k)])] += op.weight[size_t(k)] * fi;
    }
  }
  return out;
}

namespace {

struct CesaroMean {
  DensityVector mean;
  double residual = -1.0;
  bool converged = false;
};

// Tail-half Cesaro average of the power iteration, with doubling windows so
// transients fall out of the average.  Residual is measured on the window
// mean itself, not on the raw iterate.
CesaroMean cesaro_power_mean(const UlamOperator& op, double tol, long max_iter) {
  if (!(tol > 0.0)) throw InvalidArgument("stationary_density: tol must be positive");
  DensityVector f = uniform_density(op.grid);
  size_t n = f.values.size();
  long window = 64;
  long done = 0;
  CesaroMean out;
  out.mean = f;
  while (done < max_iter) {
    long tail = window - window / 2;
    std::vector<double> accum(n, 0.0);
    for (long k = 0; k < window; ++k) {
      f = apply(op, f);
      if (k >= window / 2) {
        for (size_t i = 0; i < n; ++i) accum[i] += f.values[i];
      }
    }
    done += window;
    out.mean = DensityVector{std::move(accum)};
    for (double& v : out.mean.values) v /= double(tail);
    out.residual = l1_distance(op.grid, apply(op, out.mean), out.mean);
    if (out.residual < tol) {
      out.converged = true;
      return out;
    }
    window *= 2;
  }
  return out;
}

}  // namespace

DensityVector stationary_density(const UlamOperator& op, double tol, long max_iter) {
  CesaroMean c = cesaro_power_mean(op, tol, max_iter);
  if (!c.converged) {
    throw NumericalError("stationary_density: residual " + std::to_string(c.residual) +
                             " did not reach " + std::to_string(tol),
                         c.residual);
  }
  return c.mean;
}

int tent_expected_period(double beta) {
  if (!(beta > 1.0 && beta <= 2.0)) {
    throw InvalidArgument("tent_expected_period: beta must lie in (1, 2]");
  }
  for (int n = 0; n < 64; ++n) {
    double lower = std::pow(2.0, 1.0 / std::pow(2.0, double(n + 1)));
    if (beta > lower) return 1 << n;
  }
  throw NumericalError("tent_expected_period: beta too close to 1 to resolve a band");
}

std::vector<DensityVector> spectral_cycle(const UlamOperator& op, int cycle_length,
                                          const DensityVector& f0, int burn_in, int rounds,
                                          double closure_tol) {
  if (cycle_length < 1) throw InvalidArgument("spectral_cycle: cycle_length must be >= 1");
  if (burn_in < 0 || rounds < 1) throw InvalidArgument("spectral_cycle: bad averaging window");
  size_t n = size_t(op.grid.cells());
  if (f0.values.size() != n) throw InvalidArgument("spectral_cycle: dimension mismatch");

  DensityVector f = f0;
  for (int k = 0; k < burn_in; ++k) f = apply(op, f);

  std::vector<DensityVector> cycle(size_t(cycle_length),
                                   DensityVector{std::vector<double>(n, 0.0)});
  for (int t = 0; t < rounds; ++t) {
    for (int j = 0; j < cycle_length; ++j) {
      for (size_t i = 0; i < n; ++i) cycle[size_t(j)].values[i] += f.values[i];
      f = apply(op, f);
    }
  }
  for (auto& g : cycle) {
    for (double& v : g.values) v /= double(rounds);
  }

  double worst = 0.0;
  for (int j = 0; j < cycle_length; ++j) {
    DensityVector next = apply(op, cycle[size_t(j)]);
    worst = std::max(worst, l1_distance(op.grid, next, cycle[size_t((j + 1) % cycle_length)]));
  }
  if (worst > closure_tol) {
    throw NumericalError("spectral_cycle: cycle not closed (worst step distance " +
                             std::to_string(worst) +
                             "); use a finer grid or a longer averaging window",
                         worst);
  }
  return cycle;
}

ConvergenceReport convergence_diagnostics(const UlamOperator& op, const DensityVector& f0,
                                          int n) {
  if (n < 1) throw InvalidArgument("convergence_diagnostics: n must be >= 1");
  // A strictly cyclic operator (exact permutation of cells) can only push the
  // Cesaro residual down like 1/window, so accept a loose-but-small residual
  // here instead of demanding the fixed-point tolerance.
  CesaroMean ref = cesaro_power_mean(op, 1e-8, 200000);
  if (!ref.converged && ref.residual > 1e-3) {
    throw NumericalError("convergence_diagnostics: no usable stationary estimate (residual " +
                             std::to_string(ref.residual) + ")",
                         ref.residual);
  }
  DensityVector star = std::move(ref.mean);
  ConvergenceReport report;
  report.max_cell_density = *std::max_element(star.values.begin(), star.values.end());

  DensityVector f = f0;
  std::vector<double> running(f0.values.size(), 0.0);
  for (int k = 1; k <= n; ++k) {
    f = apply(op, f);
    report.direct_orbit.push_back(l1_distance(op.grid, f, star));
    for (size_t i = 0; i < running.size(); ++i) running[i] += f.values[i];
    DensityVector mean{running};
    for (double& v : mean.values) v /= double(k);
    report.cesaro_orbit.push_back(l1_distance(op.grid, mean, star));
  }
  return report;
}

void save_operator(const UlamOperator& op, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("save_operator: cannot open " + path);
  nlohmann::json header = {
      {"schema", 1},
      {"x0", op.grid.x_lo()},
      {"x1", op.grid.x_hi()},
      {"y0", op.grid.y_lo()},
      {"y1", op.grid.y_hi()},
      {"nx", op.grid.nx()},
      {"ny", op.grid.ny()},
      {"seed", op.seed},
      {"samples_per_cell", op.samples_per_cell},
  };
  out << header.dump() << "\n";
  char line[80];
  for (int i = 0; i < op.grid.cells(); ++i) {
    for (std::int64_t k = op.row_start[size_t(i)]; k < op.row_start[size_t(i) + 1]; ++k) {
      std::snprintf(line, sizeof line, "%d,%d,%.17g\n", i, op.col[size_t(k)],
                    op.weight[size_t(k)]);
      out << line;
    }
    if (op.escaped_mass[size_t(i)] > 0.0) {
      std::snprintf(line, sizeof line, "%d,-1,%.17g\n", i, op.escaped_mass[size_t(i)]);
      out << line;
    }
  }
  if (!out.good()) throw NumericalError("save_operator: write failed for " + path);
}

UlamOperator load_operator(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("load_operator: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw InvalidArgument("load_operator: empty file " + path);
  nlohmann::json header = nlohmann::json::parse(line);
  if (header.value("schema", 0) != 1) {
    throw InvalidArgument("load_operator: unsupported schema in " + path);
  }

  UlamOperator op;
  int ny = header.at("ny").get<int>();
  if (ny == 1) {
    op.grid = Grid::interval(header.at("x0").get<double>(), header.at("x1").get<double>(),
                             header.at("nx").get<int>());
  } else {
    op.grid = Grid::rect(header.at("x0").get<double>(), header.at("x1").get<double>(),
                         header.at("y0").get<double>(), header.at("y1").get<double>(),
                         header.at("nx").get<int>(), ny);
  }
  op.seed = header.at("seed").get<std::uint64_t>();
  op.samples_per_cell = header.at("samples_per_cell").get<int>();

  int n = op.grid.cells();
  op.escaped_mass.assign(size_t(n), 0.0);
  std::vector<std::int64_t> counts(size_t(n), 0);
  int last_row = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    int row = 0, column = 0;
    double w = 0.0;
    if (std::sscanf(line.c_str(), "%d,%d,%lf", &row, &column, &w) != 3 || row < last_row ||
        row >= n || column >= n) {
      throw InvalidArgument("load_operator: malformed triple line: " + line);
    }
    last_row = row;
    if (column < 0) {
      op.escaped_mass[size_t(row)] = w;
    } else {
      op.col.push_back(column);
      op.weight.push_back(w);
      ++counts[size_t(row)];
    }
  }
  op.row_start.assign(size_t(n) + 1, 0);
  for (int i = 0; i < n; ++i) op.row_start[size_t(i) + 1] = op.row_start[size_t(i)] + counts[size_t(i)];
  return op;
}

}  // namespace statper
