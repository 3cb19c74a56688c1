#pragma once

#include <cstddef>
#include <vector>

#include "shapereg/cone.hpp"
#include "shapereg/series.hpp"

namespace shapereg {

// ---- valley-shaped (unimodal) regression ----

struct unimodal_fit {
  std::vector<double> values;
  std::size_t mode = 0;  // first index attaining the minimum
  double sse = 0.0;
};

// Least squares fit over vectors that decrease down to some index and
// increase after it. The feasible set is the union over split positions c
// of {nonincreasing on the first c entries} x {nondecreasing on the rest},
// so the global fit is found by scanning all n+1 splits with prefix and
// suffix pooling in linear total time. Among splits with equal (up to
// rounding) error the smallest mode wins.
unimodal_fit fit_unimodal(const std::vector<double>& y);

// ---- convex regression on a 1-D design ----

// Weighted least squares over sequences with nondecreasing slopes on the
// design x. Dykstra supplies a warm start; an active set polish then solves
// the equality-constrained problem on the identified piecewise linear basis
// exactly and verifies the multipliers. knots in the result are interior
// design indices where the slope strictly changes. w empty means unit
// weights.
fit_result fit_convex_weighted(const std::vector<double>& x,
                               const std::vector<double>& z,
                               const std::vector<double>& w = {},
                               double tol = 1e-9, std::size_t max_iter = 0);

fit_result fit_convex1d(const series& s, double tol = 1e-9,
                        std::size_t max_iter = 0);

// Max violation of the cumulative characterization of the convex fit on the
// canonical grid: running sums of the fitted cumulative means must dominate
// those of the data, with equality at slope changes and at the right edge,
// and the full sums must agree. Small return value certifies optimality.
double verify_convex_characterization(const series& s, const fit_result& fit);

// ---- higher order difference constraints ----

// Projection onto {k-th forward differences >= 0} on an implicitly
// equispaced design, through the generic cone solver. k = 1 is the
// monotone cone, k = 2 the convex cone.
fit_result fit_k_monotone(const std::vector<double>& y, std::size_t k,
                          double tol = 1e-9, std::size_t max_iter = 0);

// ---- matrix (two-way) isotonic regression ----

struct matrix_data {
  std::size_t n1 = 0, n2 = 0;   // rows, cols
  std::vector<double> a;        // row-major, size n1 * n2

  double& at(std::size_t i, std::size_t j) { return a[i * n2 + j]; }
  double at(std::size_t i, std::size_t j) const { return a[i * n2 + j]; }
};

struct matrix_fit {
  std::size_t n1 = 0, n2 = 0;
  std::vector<double> theta_hat;  // row-major
  double sse = 0.0;
  double kkt_residual = 0.0;
  std::size_t iterations = 0;
  bool converged = true;
};

// Projection onto matrices nondecreasing along every row and every column:
// Dykstra alternation between the two pooled one-dimensional cones, one
// correction matrix per cone.
matrix_fit fit_matrix_isotonic(const matrix_data& y, double tol = 1e-9,
                               std::size_t max_iter = 0);

}  // namespace shapereg
