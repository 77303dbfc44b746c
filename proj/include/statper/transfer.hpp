#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "statper/errors.hpp"
#include "statper/types.hpp"

namespace statper {

// Uniform cell partition of an axis-aligned rectangle. The 1D variant is a
// single row of cells over an interval; operations that only make sense in
// one dimension check for it explicitly.
class Grid {
 public:
  // Default state is the unit square at the coarsest legal resolution;
  // meaningful grids come from the factories below.
  Grid() = default;
  static Grid rect(double x0, double x1, double y0, double y1, int nx, int ny);
  static Grid interval(double x0, double x1, int nx);

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  int cells() const { return nx_ * ny_; }
  bool one_dimensional() const { return ny_ == 1; }

  double x_lo() const { return x0_; }
  double x_hi() const { return x1_; }
  double y_lo() const { return y0_; }
  double y_hi() const { return y1_; }

  double cell_width() const { return (x1_ - x0_) / nx_; }
  double cell_height() const { return (y1_ - y0_) / ny_; }
  double cell_area() const { return cell_width() * cell_height(); }

  // Index of the cell containing v, or -1 when v falls outside the bounds.
  // Points exactly on the upper edges belong to the last cell.
  int cell_index(Point2 v) const;
  Point2 cell_center(int index) const;

 private:
  double x0_ = 0.0, x1_ = 1.0, y0_ = 0.0, y1_ = 1.0;
  int nx_ = 2, ny_ = 2;
};

// Row-stochastic cell-to-cell transition table in compressed sparse rows.
// Row = source cell; weights give the fraction of the cell's sampled mass
// landing in each destination cell. Mass leaving the grid is recorded per
// row in escaped_mass and is never renormalized away.
struct UlamOperator {
  Grid grid;
  std::vector<std::int64_t> row_start;
  std::vector<int> col;
  std::vector<double> weight;
  std::vector<double> escaped_mass;
  std::uint64_t seed = 0;
  int samples_per_cell = 0;
};

struct DensityVector {
  std::vector<double> values;
};

DensityVector uniform_density(const Grid& grid);
// Density concentrated on a single cell (value 1/cell_area there).
DensityVector indicator_density(const Grid& grid, int cell);
double l1_norm(const Grid& grid, const DensityVector& f);
double l1_distance(const Grid& grid, const DensityVector& a, const DensityVector& b);

// Builds the transition table by stratified jittered sampling: each cell is
// split into equal strata with one uniformly jittered sample per stratum,
// using a per-cell deterministic stream derived from the seed. In 2D
// samples_per_cell is rounded up to the next perfect square to keep the
// strata square. Maps producing non-finite images abort the build with the
// offending cell named.
UlamOperator build_ulam(const std::function<Point2(Point2)>& map, const Grid& grid,
                        int samples_per_cell = 16, std::uint64_t seed = 1);
UlamOperator build_ulam_1d(const std::function<double(double)>& map, const Grid& grid,
                           int samples_per_cell = 16, std::uint64_t seed = 1);

// Pushes a density through the operator. L1 mass is preserved exactly up to
// the escaped fraction; no renormalization happens here.
DensityVector apply(const UlamOperator& op, const DensityVector& f);

// Cesaro average of the tail half of the power-iteration orbit from the
// uniform start, with the window doubled until the fixed-point residual
// drops below tol. Converges even when the plain orbit cycles. Throws
// NumericalError carrying the last residual when max_iter steps are not
// enough.
DensityVector stationary_density(const UlamOperator& op, double tol = 1e-8,
                                 long max_iter = 200000);

struct PeripheralEigenvalue {
  std::complex<double> value;
  double modulus = 0.0;
  // Reduced order of the nearest root of unity within the angular
  // tolerance; 0 when no root of order <= max_order is close enough.
  int root_order = 0;
  bool matched = false;
};

// Eigenvalues near the unit circle plus what they imply for the density
// cycle: matched_count counts the root-of-unity eigenvalues at or above the
// modulus floor and period is the least common multiple of their orders.
struct PeripheralSpectrum {
  std::vector<PeripheralEigenvalue> eigenvalues;
  int matched_count = 0;
  int period = 1;
};

// Finds all eigenvalues with modulus >= modulus_floor (dense solve for small
// operators, Arnoldi iteration for large ones) and matches each to the
// nearest root of unity of order <= max_order within angular tolerance
// pi/(4*max_order), or angle_tolerance radians when that argument is
// positive. Unmatched near-unit eigenvalues stay in the list, flagged. The
// largest-modulus eigenvalue is always retained even when it sits below the
// floor.
//
// The default tolerance is generous and suits operators whose near-unit
// eigenvalues are all genuine roots of unity (permutation-like dynamics).
// Attractors carrying an irrational rotation put eigenvalues at angles
// theta, 2*theta, ... arbitrarily close to the unit circle; those angles
// land near *some* rational for any denominator bound above ~8, so telling
// them apart from true roots needs a tolerance of a few milliradians. See
// the cross-method agreement test for a calibrated choice.
PeripheralSpectrum peripheral_spectrum(const UlamOperator& op, double modulus_floor = 0.95,
                                       int max_order = 100, double angle_tolerance = -1.0);

// Limit cycle of the density orbit: averages the subsequences with indices
// congruent modulo cycle_length after a burn-in, then verifies the cycle is
// closed (applying the operator sends element k to element k+1 mod
// cycle_length within closure_tol in L1). Throws NumericalError when the
// cycle fails to close; a finer grid or longer averaging usually fixes that.
std::vector<DensityVector> spectral_cycle(const UlamOperator& op, int cycle_length,
                                          const DensityVector& f0, int burn_in = 512,
                                          int rounds = 64, double closure_tol = 0.05);

// Band law for the tent family: period 2^n on the band
// 2^(1/2^(n+1)) < beta <= 2^(1/2^n).
int tent_expected_period(double beta);

struct ConvergenceReport {
  // ||P^k f0 - f*||_1 for k = 1..n: decays for exact (mixing) systems,
  // oscillates under asymptotic periodicity.
  std::vector<double> direct_orbit;
  // ||(1/k) sum_{j<=k} P^j f0 - f*||_1: decays whenever the system is
  // ergodic, cycling or not.
  std::vector<double> cesaro_orbit;
  // Peak of the stationary density; compared across grid refinements it
  // exposes mass concentrating on a null set.
  double max_cell_density = 0.0;
};

ConvergenceReport convergence_diagnostics(const UlamOperator& op, const DensityVector& f0,
                                          int n);

// Text serialization: a single JSON header line (grid bounds, sizes, seed)
// followed by one "row,col,weight" triple per line, with col = -1 holding a
// row's escaped mass. Lossless for doubles.
void save_operator(const UlamOperator& op, const std::string& path);
UlamOperator load_operator(const std::string& path);

}  // namespace statper
