#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <vector>

#include "statper/transfer.hpp"

namespace statper {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Density-side action y += T^t x for the CSR table.
void push_density(const UlamOperator& op, const double* x, double* y) {
  int n = op.grid.cells();
  std::fill(y, y + n, 0.0);
  for (int i = 0; i < n; ++i) {
    double xi = x[i];
    if (xi == 0.0) continue;
    for (std::int64_t k = op.row_start[size_t(i)]; k < op.row_start[size_t(i) + 1]; ++k) {
      y[op.col[size_t(k)]] += op.weight[size_t(k)] * xi;
    }
  }
}

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Reduced order of the nearest root of unity with order <= max_order, or 0
// when none sits within tol_ang of the eigenvalue's angle.
int nearest_root_order(std::complex<double> lambda, int max_order, double tol_ang) {
  double phi = std::arg(lambda);
  double best_dist = tol_ang;
  int best_order = 0;
  for (int k = 1; k <= max_order; ++k) {
    long j = std::lround(phi * double(k) / kTwoPi);
    double dist = std::fabs(phi - kTwoPi * double(j) / double(k));
    if (dist < best_dist - 1e-12) {
      best_dist = dist;
      long jj = ((j % k) + k) % k;
      best_order = jj == 0 ? 1 : k / int(std::gcd(long(k), jj));
    }
  }
  return best_order;
}

std::vector<std::complex<double>> dense_eigenvalues(const UlamOperator& op) {
  int n = op.grid.cells();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (std::int64_t k = op.row_start[size_t(i)]; k < op.row_start[size_t(i) + 1]; ++k) {
      m(op.col[size_t(k)], i) += op.weight[size_t(k)];
    }
  }
  Eigen::EigenSolver<Eigen::MatrixXd> solver(m, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("peripheral_spectrum: dense eigensolver failed to converge");
  }
  std::vector<std::complex<double>> out(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) out[size_t(i)] = solver.eigenvalues()[i];
  return out;
}

// Arnoldi iteration with modified Gram-Schmidt and one reorthogonalization
// pass. Returns the converged Ritz values only; unconverged directions are
// noise, not spectrum.
std::vector<std::complex<double>> arnoldi_eigenvalues(const UlamOperator& op, int subspace) {
  int n = op.grid.cells();
  int m = std::min(subspace, n);

  std::vector<Eigen::VectorXd> basis;
  basis.reserve(size_t(m) + 1);
  Eigen::VectorXd v0(n);
  std::uint64_t stream = 0xc0ffee11d00dULL;
  for (int i = 0; i < n; ++i) v0[i] = double(splitmix64(stream) >> 11) * 0x1.0p-53 - 0.5;
  v0.normalize();
  basis.push_back(v0);

  Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(m + 1, m);
  int steps = m;
  for (int j = 0; j < m; ++j) {
    Eigen::VectorXd w(n);
    push_density(op, basis[size_t(j)].data(), w.data());
    for (int pass = 0; pass < 2; ++pass) {
      for (int i = 0; i <= j; ++i) {
        double c = basis[size_t(i)].dot(w);
        hess(i, j) += c;
        w -= c * basis[size_t(i)];
      }
    }
    double norm = w.norm();
    hess(j + 1, j) = norm;
    if (norm < 1e-12) {
      steps = j + 1;
      break;
    }
    basis.push_back(w / norm);
  }

  Eigen::MatrixXd square = hess.topLeftCorner(steps, steps);
  Eigen::EigenSolver<Eigen::MatrixXd> solver(square, /*computeEigenvectors=*/true);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("peripheral_spectrum: Hessenberg eigensolver failed to converge");
  }

  // Peripheral classification only needs angles to ~1e-3, so accept Ritz
  // values a fair way before full convergence.
  double tail = steps < m ? 0.0 : hess(steps, steps - 1);
  std::vector<std::complex<double>> out;
  for (int i = 0; i < steps; ++i) {
    double residual = std::fabs(tail) * std::abs(solver.eigenvectors()(steps - 1, i));
    if (residual < 1e-5) out.push_back(solver.eigenvalues()[i]);
  }
  return out;
}

}  // namespace

PeripheralSpectrum peripheral_spectrum(const UlamOperator& op, double modulus_floor,
                                       int max_order, double angle_tolerance) {
  if (!(modulus_floor > 0.8 && modulus_floor < 1.0)) {
    throw InvalidArgument("peripheral_spectrum: modulus_floor must lie in (0.8, 1)");
  }
  if (max_order < 1) throw InvalidArgument("peripheral_spectrum: max_order must be >= 1");

  std::vector<std::complex<double>> eigenvalues =
      op.grid.cells() <= 1024 ? dense_eigenvalues(op) : arnoldi_eigenvalues(op, 256);
  if (eigenvalues.empty()) {
    throw NumericalError("peripheral_spectrum: no converged eigenvalues");
  }

  size_t top = 0;
  for (size_t i = 1; i < eigenvalues.size(); ++i) {
    if (std::abs(eigenvalues[i]) > std::abs(eigenvalues[top])) top = i;
  }

  double tol_ang = angle_tolerance > 0.0
                       ? angle_tolerance
                       : 3.14159265358979323846 / (4.0 * double(max_order));
  PeripheralSpectrum spectrum;
  long long period = 1;
  for (size_t i = 0; i < eigenvalues.size(); ++i) {
    double modulus = std::abs(eigenvalues[i]);
    if (modulus < modulus_floor && i != top) continue;
    PeripheralEigenvalue entry;
    entry.value = eigenvalues[i];
    entry.modulus = modulus;
    entry.root_order = nearest_root_order(eigenvalues[i], max_order, tol_ang);
    entry.matched = entry.root_order > 0;
    if (entry.matched) {
      spectrum.matched_count += 1;
      period = std::lcm(period, (long long)entry.root_order);
      if (period > 1000000) {
        throw NumericalError(
            "peripheral_spectrum: matched orders compound past any plausible period; "
            "the near-peripheral set is too noisy (raise modulus_floor or refine the grid)");
      }
    }
    spectrum.eigenvalues.push_back(entry);
  }
  spectrum.period = int(period);

  std::sort(spectrum.eigenvalues.begin(), spectrum.eigenvalues.end(),
            [](const PeripheralEigenvalue& a, const PeripheralEigenvalue& b) {
              return a.modulus > b.modulus;
            });
  return spectrum;
}

}  // namespace statper
