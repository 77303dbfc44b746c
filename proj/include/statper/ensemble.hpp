#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "statper/errors.hpp"
#include "statper/maps.hpp"
#include "statper/transfer.hpp"
#include "statper/types.hpp"

namespace statper {

// Finite ensemble of tracked points. Escapees are counted, never stored.
struct PointCloud {
  std::vector<Point2> points;
  long escaped_count = 0;
};

// Deterministic side x side lattice of cell-center points covering
// [-half_width, half_width]^2.
PointCloud lattice_cloud(int side, double half_width);

// Advances every point `steps` times through `map`. A point leaving
// [-bound, bound]^2 (or going non-finite) at any step is dropped and counted.
PointCloud iterate_cloud(const PointCloud& cloud, const std::function<Point2(Point2)>& map,
                         int steps, double bound);

struct OccupancyGrid {
  Grid grid;
  std::vector<int> counts;
  std::vector<bool> occupied;
  int min_count = 1;
};

// Tallies cloud points into grid cells; cells reaching min_count are marked
// occupied. Points outside the grid are ignored here (escape accounting
// belongs to iterate_cloud).
OccupancyGrid occupancy(const PointCloud& cloud, const Grid& grid, int min_count = 1);

// Occupied cells grouped into connected components (flood fill), with
// components under min_cells discarded as sampling speckle. label is -1 on
// background cells and on discarded speckle.
struct LabeledComponents {
  Grid grid;
  std::vector<int> label;
  std::vector<std::vector<int>> cells;
  int count() const { return int(cells.size()); }
};

LabeledComponents connected_components(const OccupancyGrid& occ, int connectivity = 8,
                                       int min_cells = 20);

// How the map permutes the support components, and the order of that
// permutation.
struct SupportCycle {
  LabeledComponents components;
  std::vector<int> permutation;
  int period = 0;
};

// Advances the center of every member cell one step and lets each component
// vote on its destination. Images landing in an unlabeled cell are snapped
// to the nearest labeled cell within snap_radius cells (sampling holes in a
// thinly covered support). Components whose votes are mostly lost, or that
// receive no votes at all, are discarded as transient debris; components
// that coherently vote for the same destination are merged back together
// (flood-fill splinters of one region). After that cleanup a component whose
// top destination collects less than `majority` of its votes, or a
// non-bijective outcome, raises AmbiguousPermutationError (the usual cause
// is an under-resolved grid).
SupportCycle component_permutation(const LabeledComponents& components,
                                   const std::function<Point2(Point2)>& map,
                                   double majority = 0.9, int snap_radius = 2);

struct EnsembleSettings {
  int cloud_side = 1000;
  double box_half_width = 5.0;
  int burn_in = 500;
  int grid_nx = 512;
  int grid_ny = 512;
  int min_count = 1;
  int min_cells = 20;
  int connectivity = 8;
  double majority = 0.9;
  int snap_radius = 2;
  double escape_bound = 50.0;
  double divergence_fraction = 0.99;
  // When unset, the occupancy grid hugs the surviving cloud: per-axis
  // 0.1%/99.9% quantiles padded by 5% of the span.
  bool fixed_bounds = false;
  double bound_x_lo = 0.0, bound_x_hi = 0.0, bound_y_lo = 0.0, bound_y_hi = 0.0;
};

// Full pipeline for one parameter point: lattice -> burn-in -> occupancy ->
// components -> permutation. Throws DivergenceError when more than
// divergence_fraction of the cloud escapes, and propagates the component and
// permutation errors. When occupancy_out is given it receives the occupancy
// tally the components were cut from.
SupportCycle detect_support_cycle(const MapParams& params, const EnsembleSettings& settings,
                                  double* escaped_fraction = nullptr,
                                  OccupancyGrid* occupancy_out = nullptr);

// Ulam operator fitted to the attractor: a 200 x 200 lattice over
// [-5, 5]^2 is burned in for 400 steps (escape bound 50), the surviving
// bounding box is padded by 2%, and the operator is built on an nx x ny
// grid over that box. Throws NumericalError if nothing survives burn-in.
UlamOperator attractor_ulam(const MapParams& params, int nx, int ny, int samples_per_cell = 16,
                            std::uint64_t seed = 1);

int detect_period(const MapParams& params, const EnsembleSettings& settings);

enum class ScanStatus { Ok, Divergent, Ambiguous, EmptySupport };

struct ScanRow {
  double alpha = 0.0;
  ScanStatus status = ScanStatus::Ok;
  int period = -1;
  int component_count = 0;
  double escaped_fraction = 0.0;
};

// Sweeps alpha over [alpha_from, alpha_to] in `step` increments. Failures
// become per-row markers, never exceptions.
std::vector<ScanRow> period_scan(double beta, double alpha_from, double alpha_to, double step,
                                 const EnsembleSettings& settings);

// Plain-text portable graymap (P2) of the counts, brightest cell = 255.
void write_occupancy_pgm(const OccupancyGrid& occ, const std::string& path);
// Rows "ix,iy,count" for occupied cells only.
void write_occupancy_csv(const OccupancyGrid& occ, const std::string& path);
// Rows "alpha,status,period,components,escaped_fraction".
void write_scan_csv(const std::vector<ScanRow>& rows, const std::string& path);

}  // namespace statper
