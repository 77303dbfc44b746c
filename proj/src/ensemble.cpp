#include "statper/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "statper/maps.hpp"

namespace statper {

PointCloud lattice_cloud(int side, double half_width) {
  if (side < 1) throw InvalidArgument("lattice_cloud: side must be >= 1");
  if (!(half_width > 0.0)) throw InvalidArgument("lattice_cloud: half_width must be positive");
  PointCloud cloud;
  cloud.points.reserve(size_t(side) * size_t(side));
  double pitch = 2.0 * half_width / side;
  for (int iy = 0; iy < side; ++iy) {
    double y = -half_width + (iy + 0.5) * pitch;
    for (int ix = 0; ix < side; ++ix) {
      cloud.points.push_back({-half_width + (ix + 0.5) * pitch, y});
    }
  }
  return cloud;
}

PointCloud iterate_cloud(const PointCloud& cloud, const std::function<Point2(Point2)>& map,
                         int steps, double bound) {
  if (steps < 0) throw InvalidArgument("iterate_cloud: steps must be >= 0");
  if (!(bound > 0.0)) throw InvalidArgument("iterate_cloud: bound must be positive");
  PointCloud out = cloud;
  for (int k = 0; k < steps; ++k) {
    size_t kept = 0;
    for (size_t i = 0; i < out.points.size(); ++i) {
      Point2 v = map(out.points[i]);
      bool inside = std::isfinite(v.x) && std::isfinite(v.y) && std::abs(v.x) <= bound &&
                    std::abs(v.y) <= bound;
      if (inside) {
        out.points[kept++] = v;
      } else {
        ++out.escaped_count;
      }
    }
    out.points.resize(kept);
    if (kept == 0) break;
  }
  return out;
}

OccupancyGrid occupancy(const PointCloud& cloud, const Grid& grid, int min_count) {
  if (min_count < 1) throw InvalidArgument("occupancy: min_count must be >= 1");
  OccupancyGrid occ;
  occ.grid = grid;
  occ.min_count = min_count;
  occ.counts.assign(size_t(grid.cells()), 0);
  for (const Point2& v : cloud.points) {
    int idx = grid.cell_index(v);
    if (idx >= 0) ++occ.counts[size_t(idx)];
  }
  occ.occupied.resize(occ.counts.size());
  for (size_t i = 0; i < occ.counts.size(); ++i) occ.occupied[i] = occ.counts[i] >= min_count;
  return occ;
}

LabeledComponents connected_components(const OccupancyGrid& occ, int connectivity,
                                       int min_cells) {
  if (connectivity != 4 && connectivity != 8) {
    throw InvalidArgument("connected_components: connectivity must be 4 or 8");
  }
  if (min_cells < 1) throw InvalidArgument("connected_components: min_cells must be >= 1");

  int nx = occ.grid.nx(), ny = occ.grid.ny();
  LabeledComponents result;
  result.grid = occ.grid;
  result.label.assign(size_t(nx) * size_t(ny), -1);

  std::vector<int> stack;
  for (int start = 0; start < nx * ny; ++start) {
    if (!occ.occupied[size_t(start)] || result.label[size_t(start)] != -1) continue;
    int id = int(result.cells.size());
    std::vector<int> members;
    stack.assign(1, start);
    result.label[size_t(start)] = id;
    while (!stack.empty()) {
      int cell = stack.back();
      stack.pop_back();
      members.push_back(cell);
      int cx = cell % nx, cy = cell / nx;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          if (connectivity == 4 && dx != 0 && dy != 0) continue;
          int x = cx + dx, y = cy + dy;
          if (x < 0 || x >= nx || y < 0 || y >= ny) continue;
          int n = y * nx + x;
          if (occ.occupied[size_t(n)] && result.label[size_t(n)] == -1) {
            result.label[size_t(n)] = id;
            stack.push_back(n);
          }
        }
      }
    }
    result.cells.push_back(std::move(members));
  }

  // Drop speckle components and relabel the survivors densely.
  std::vector<std::vector<int>> kept;
  std::vector<int> remap(result.cells.size(), -1);
  for (size_t i = 0; i < result.cells.size(); ++i) {
    if (int(result.cells[i].size()) >= min_cells) {
      remap[i] = int(kept.size());
      kept.push_back(std::move(result.cells[i]));
    }
  }
  for (int& l : result.label) {
    if (l >= 0) l = remap[size_t(l)];
  }
  result.cells = std::move(kept);

  if (result.cells.empty()) {
    throw EmptySupportError("connected_components: no component reaches " +
                            std::to_string(min_cells) + " cells");
  }
  return result;
}

namespace {

int permutation_period(const std::vector<int>& perm) {
  std::vector<bool> seen(perm.size(), false);
  long long period = 1;
  for (size_t i = 0; i < perm.size(); ++i) {
    if (seen[i]) continue;
    int len = 0;
    for (size_t j = i; !seen[j]; j = size_t(perm[j])) {
      seen[j] = true;
      ++len;
    }
    period = std::lcm(period, (long long)len);
  }
  return int(period);
}

}  // namespace

namespace {

// Component owning the cell nearest to `image`, scanning Chebyshev rings of
// growing radius; -1 when no labeled cell lies within snap_radius. Ties on
// the first non-empty ring go to the most frequent label, then the smallest.
int snapped_destination(const LabeledComponents& comps, Point2 image, int snap_radius) {
  const Grid& g = comps.grid;
  int direct = g.cell_index(image);
  if (direct >= 0 && comps.label[size_t(direct)] >= 0) return comps.label[size_t(direct)];

  int nx = g.nx(), ny = g.ny();
  double fx = (image.x - g.x_lo()) / g.cell_width();
  double fy = (image.y - g.y_lo()) / g.cell_height();
  if (!std::isfinite(fx) || !std::isfinite(fy)) return -1;
  if (fx < -1e9 || fx > 1e9 || fy < -1e9 || fy > 1e9) return -1;
  int bx = int(std::floor(fx)), by = int(std::floor(fy));

  std::vector<long> ring_votes;
  for (int r = 1; r <= snap_radius; ++r) {
    ring_votes.assign(comps.cells.size(), 0);
    bool any = false;
    for (int dy = -r; dy <= r; ++dy) {
      for (int dx = -r; dx <= r; ++dx) {
        if (std::max(std::abs(dx), std::abs(dy)) != r) continue;
        int x = bx + dx, y = by + dy;
        if (x < 0 || x >= nx || y < 0 || y >= ny) continue;
        int l = comps.label[size_t(y) * size_t(nx) + size_t(x)];
        if (l >= 0) {
          ++ring_votes[size_t(l)];
          any = true;
        }
      }
    }
    if (any) {
      return int(std::max_element(ring_votes.begin(), ring_votes.end()) - ring_votes.begin());
    }
  }
  return -1;
}

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(size_t(n)) {
    for (int i = 0; i < n; ++i) parent[size_t(i)] = i;
  }
  int find(int a) {
    while (parent[size_t(a)] != a) {
      parent[size_t(a)] = parent[size_t(parent[size_t(a)])];
      a = parent[size_t(a)];
    }
    return a;
  }
  void join(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[size_t(std::max(a, b))] = std::min(a, b);
  }
};

}  // namespace

SupportCycle component_permutation(const LabeledComponents& components,
                                   const std::function<Point2(Point2)>& map, double majority,
                                   int snap_radius) {
  int k = components.count();
  if (k < 1) throw InvalidArgument("component_permutation: no components");
  if (!(majority > 0.5 && majority <= 1.0)) {
    throw InvalidArgument("component_permutation: majority must lie in (0.5, 1]");
  }
  if (snap_radius < 0) throw InvalidArgument("component_permutation: snap_radius must be >= 0");

  // Destination component of every member cell, computed once.
  std::vector<std::vector<int>> dest(static_cast<size_t>(k));
  for (int i = 0; i < k; ++i) {
    dest[size_t(i)].reserve(components.cells[size_t(i)].size());
    for (int cell : components.cells[size_t(i)]) {
      Point2 image = map(components.grid.cell_center(cell));
      dest[size_t(i)].push_back(snapped_destination(components, image, snap_radius));
    }
  }

  std::vector<bool> alive(size_t(k), true);
  UnionFind merged(k);

  // Alternate debris pruning and splinter merging until the vote digraph is
  // stable. Votes into a pruned component count as lost for the sender.
  for (int round = 0; round < 2 * k + 4; ++round) {
    std::vector<std::vector<long>> votes(size_t(k), std::vector<long>(size_t(k) + 1, 0));
    std::vector<long> in_votes(size_t(k), 0);
    for (int i = 0; i < k; ++i) {
      if (!alive[size_t(merged.find(i))]) continue;
      int src = merged.find(i);
      for (int d : dest[size_t(i)]) {
        int t = d >= 0 ? merged.find(d) : -1;
        if (t >= 0 && !alive[size_t(t)]) t = -1;
        ++votes[size_t(src)][t >= 0 ? size_t(t) : size_t(k)];
        if (t >= 0) ++in_votes[size_t(t)];
      }
    }

    bool changed = false;
    for (int i = 0; i < k; ++i) {
      if (merged.find(i) != i || !alive[size_t(i)]) continue;
      long total = 0;
      for (long v : votes[size_t(i)]) total += v;
      if (votes[size_t(i)][size_t(k)] * 2 > total || in_votes[size_t(i)] == 0) {
        alive[size_t(i)] = false;
        changed = true;
      }
    }
    if (changed) continue;

    // Components sending the majority of their mass to one shared target are
    // splinters of a single region.
    std::vector<int> claimant(size_t(k), -1);
    for (int i = 0; i < k; ++i) {
      if (merged.find(i) != i || !alive[size_t(i)]) continue;
      long total = 0, best = -1;
      int top = -1;
      for (int j = 0; j < k; ++j) {
        total += votes[size_t(i)][size_t(j)];
        if (votes[size_t(i)][size_t(j)] > best) {
          best = votes[size_t(i)][size_t(j)];
          top = j;
        }
      }
      total += votes[size_t(i)][size_t(k)];
      if (top < 0 || best * 2 < total) continue;
      if (claimant[size_t(top)] >= 0) {
        merged.join(claimant[size_t(top)], i);
        changed = true;
      } else {
        claimant[size_t(top)] = i;
      }
    }
    if (!changed) break;
  }

  // Assemble the surviving components under dense ids.
  std::vector<int> dense(size_t(k), -1);
  int survivors = 0;
  for (int i = 0; i < k; ++i) {
    if (merged.find(i) == i && alive[size_t(i)]) dense[size_t(i)] = survivors++;
  }
  if (survivors == 0) {
    throw EmptySupportError("component_permutation: every component was transient debris");
  }

  SupportCycle cycle;
  cycle.components.grid = components.grid;
  cycle.components.label.assign(components.label.size(), -1);
  cycle.components.cells.resize(size_t(survivors));
  for (int i = 0; i < k; ++i) {
    int id = dense[size_t(merged.find(i))];
    if (id < 0) continue;
    for (int cell : components.cells[size_t(i)]) {
      cycle.components.label[size_t(cell)] = id;
      cycle.components.cells[size_t(id)].push_back(cell);
    }
  }

  // Final strict vote on the cleaned components.
  std::vector<std::vector<long>> votes(size_t(survivors),
                                       std::vector<long>(size_t(survivors) + 1, 0));
  for (int i = 0; i < k; ++i) {
    int src = dense[size_t(merged.find(i))];
    if (src < 0) continue;
    for (int d : dest[size_t(i)]) {
      int t = d >= 0 ? dense[size_t(merged.find(d))] : -1;
      ++votes[size_t(src)][t >= 0 ? size_t(t) : size_t(survivors)];
    }
  }

  cycle.permutation.resize(size_t(survivors));
  for (int i = 0; i < survivors; ++i) {
    long total = 0;
    for (long v : votes[size_t(i)]) total += v;
    int top = int(std::max_element(votes[size_t(i)].begin(), votes[size_t(i)].end() - 1) -
                  votes[size_t(i)].begin());
    double share = double(votes[size_t(i)][size_t(top)]) / double(total);
    if (share < majority) {
      throw AmbiguousPermutationError(
          "component_permutation: component " + std::to_string(i) + " splits its vote (top share " +
          std::to_string(share) + "); refine the grid or enlarge the cloud");
    }
    cycle.permutation[size_t(i)] = top;
  }

  std::vector<bool> hit(size_t(survivors), false);
  for (int p : cycle.permutation) {
    if (hit[size_t(p)]) {
      throw AmbiguousPermutationError(
          "component_permutation: two components vote for the same destination");
    }
    hit[size_t(p)] = true;
  }

  cycle.period = permutation_period(cycle.permutation);
  return cycle;
}

namespace {

double trimmed_low(std::vector<double>& v) {
  size_t k = size_t(0.001 * double(v.size() - 1));
  std::nth_element(v.begin(), v.begin() + long(k), v.end());
  return v[k];
}

double trimmed_high(std::vector<double>& v) {
  size_t k = size_t(0.999 * double(v.size() - 1));
  std::nth_element(v.begin(), v.begin() + long(k), v.end());
  return v[k];
}

Grid cloud_grid(const PointCloud& cloud, const EnsembleSettings& s) {
  if (s.fixed_bounds) {
    return Grid::rect(s.bound_x_lo, s.bound_x_hi, s.bound_y_lo, s.bound_y_hi, s.grid_nx,
                      s.grid_ny);
  }
  std::vector<double> xs, ys;
  xs.reserve(cloud.points.size());
  ys.reserve(cloud.points.size());
  for (const Point2& v : cloud.points) {
    xs.push_back(v.x);
    ys.push_back(v.y);
  }
  double x0 = trimmed_low(xs), x1 = trimmed_high(xs);
  double y0 = trimmed_low(ys), y1 = trimmed_high(ys);
  double px = std::max(0.05 * (x1 - x0), 1e-6);
  double py = std::max(0.05 * (y1 - y0), 1e-6);
  return Grid::rect(x0 - px, x1 + px, y0 - py, y1 + py, s.grid_nx, s.grid_ny);
}

}  // namespace

SupportCycle detect_support_cycle(const MapParams& params, const EnsembleSettings& settings,
                                  double* escaped_fraction, OccupancyGrid* occupancy_out) {
  PointCloud cloud = lattice_cloud(settings.cloud_side, settings.box_half_width);
  double total = double(cloud.points.size());
  auto map = [&params](Point2 v) { return switched_map(v, params); };
  cloud = iterate_cloud(cloud, map, settings.burn_in, settings.escape_bound);

  double lost = double(cloud.escaped_count) / total;
  if (escaped_fraction) *escaped_fraction = lost;
  if (lost > settings.divergence_fraction) {
    throw DivergenceError("detect_support_cycle: " + std::to_string(100.0 * lost) +
                              "% of the cloud escaped",
                          lost);
  }

  OccupancyGrid occ = occupancy(cloud, cloud_grid(cloud, settings), settings.min_count);
  LabeledComponents comps =
      connected_components(occ, settings.connectivity, settings.min_cells);
  if (occupancy_out) *occupancy_out = occ;
  return component_permutation(comps, map, settings.majority, settings.snap_radius);
}

UlamOperator attractor_ulam(const MapParams& params, int nx, int ny, int samples_per_cell,
                            std::uint64_t seed) {
  PiecewiseMap2D map = make_switched_map(params);
  auto step = [map](Point2 v) { return map(v); };
  PointCloud cloud = iterate_cloud(lattice_cloud(200, 5.0), step, 400, 50.0);
  if (cloud.points.empty())
    throw NumericalError("attractor_ulam: ensemble burn-in left no points");

  double x0 = cloud.points.front().x, x1 = x0;
  double y0 = cloud.points.front().y, y1 = y0;
  for (Point2 p : cloud.points) {
    x0 = std::min(x0, p.x);
    x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y);
    y1 = std::max(y1, p.y);
  }
  double pad_x = std::max(0.02 * (x1 - x0), 1e-6);
  double pad_y = std::max(0.02 * (y1 - y0), 1e-6);
  Grid grid = Grid::rect(x0 - pad_x, x1 + pad_x, y0 - pad_y, y1 + pad_y, nx, ny);
  return build_ulam(step, grid, samples_per_cell, seed);
}

int detect_period(const MapParams& params, const EnsembleSettings& settings) {
  return detect_support_cycle(params, settings).period;
}

std::vector<ScanRow> period_scan(double beta, double alpha_from, double alpha_to, double step,
                                 const EnsembleSettings& settings) {
  if (!(step > 0.0)) throw InvalidArgument("period_scan: step must be positive");
  std::vector<ScanRow> rows;
  for (long k = 0;; ++k) {
    double alpha = alpha_from + double(k) * step;
    if (alpha > alpha_to + 0.5 * step) break;
    ScanRow row;
    row.alpha = alpha;
    try {
      SupportCycle cycle =
          detect_support_cycle(MapParams(alpha, beta), settings, &row.escaped_fraction);
      row.status = ScanStatus::Ok;
      row.period = cycle.period;
      row.component_count = cycle.components.count();
    } catch (const DivergenceError& e) {
      row.status = ScanStatus::Divergent;
      row.escaped_fraction = e.escaped_fraction();
    } catch (const AmbiguousPermutationError&) {
      row.status = ScanStatus::Ambiguous;
    } catch (const EmptySupportError&) {
      row.status = ScanStatus::EmptySupport;
    }
    rows.push_back(row);
  }
  return rows;
}

namespace {

const char* status_name(ScanStatus s) {
  switch (s) {
    case ScanStatus::Ok: return "ok";
    case ScanStatus::Divergent: return "divergent";
    case ScanStatus::Ambiguous: return "ambiguous";
    case ScanStatus::EmptySupport: return "empty";
  }
  return "unknown";
}

}  // namespace

void write_occupancy_pgm(const OccupancyGrid& occ, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("write_occupancy_pgm: cannot open " + path);
  int nx = occ.grid.nx(), ny = occ.grid.ny();
  int peak = *std::max_element(occ.counts.begin(), occ.counts.end());
  out << "P2\n" << nx << " " << ny << "\n255\n";
  for (int iy = ny - 1; iy >= 0; --iy) {
    for (int ix = 0; ix < nx; ++ix) {
      int c = occ.counts[size_t(iy) * size_t(nx) + size_t(ix)];
      int v = peak > 0 ? (c * 255 + peak - 1) / peak : 0;
      out << v << (ix + 1 == nx ? '\n' : ' ');
    }
  }
}

void write_occupancy_csv(const OccupancyGrid& occ, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("write_occupancy_csv: cannot open " + path);
  out << "ix,iy,count\n";
  int nx = occ.grid.nx();
  for (int i = 0; i < occ.grid.cells(); ++i) {
    if (occ.counts[size_t(i)] > 0) {
      out << (i % nx) << ',' << (i / nx) << ',' << occ.counts[size_t(i)] << '\n';
    }
  }
}

void write_scan_csv(const std::vector<ScanRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("write_scan_csv: cannot open " + path);
  out << "alpha,status,period,components,escaped_fraction\n";
  char line[160];
  for (const ScanRow& r : rows) {
    if (r.status == ScanStatus::Ok) {
      std::snprintf(line, sizeof line, "%.10g,%s,%d,%d,%.6g\n", r.alpha, status_name(r.status),
                    r.period, r.component_count, r.escaped_fraction);
    } else {
      std::snprintf(line, sizeof line, "%.10g,%s,,,%.6g\n", r.alpha, status_name(r.status),
                    r.escaped_fraction);
    }
    out << line;
  }
}

}  // namespace statper
