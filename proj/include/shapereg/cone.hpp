#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace shapereg {

// One halfspace {theta : a . theta <= 0}, a stored sparsely.
struct sparse_row {
  std::vector<std::pair<std::size_t, double>> terms;
  double norm2 = 0.0;  // ||a||^2, cached
};

sparse_row make_row(std::vector<std::pair<std::size_t, double>> terms);

// Intersection of halfspaces through the origin: a closed convex cone.
// probe_directions are known members of the cone used to certify fits; they
// are optional and never affect the projection itself.
struct cone_spec {
  std::size_t n = 0;
  std::vector<sparse_row> rows;
  std::vector<std::vector<double>> probe_directions;
};

struct fit_block {
  std::size_t lo = 0, hi = 0;  // inclusive index range
  double value = 0.0;
};

struct fit_result {
  std::vector<double> theta_hat;
  double sse = 0.0;            // ||y - theta_hat||^2
  double kkt_residual = 0.0;   // certificate; see verify_projection
  std::size_t iterations = 0;  // full sweeps performed
  bool converged = true;
  std::vector<fit_block> blocks;   // maximal runs of equal fitted values
  std::vector<std::size_t> knots;  // slope-change indices (convex fits only)
};

// Max over probes p of <y - theta_hat, p - theta_hat>, clipped below at 0,
// together with the cone orthogonality defect |<y - theta_hat, theta_hat>|.
// At the exact projection both are <= 0 resp. == 0 for every cone member p,
// so the return value is a one-sided optimality certificate: small means no
// probe exposes a better feasible point.
double verify_projection(const std::vector<double>& y,
                         const std::vector<double>& theta_hat,
                         const std::vector<std::vector<double>>& probes,
                         bool cone_through_origin = true);

// Euclidean projection of y onto the cone by cyclic corrected alternating
// projections onto the halfspaces (Dykstra). Inputs are scaled by ||y||_inf
// before iterating; tol applies on the scaled problem. max_iter == 0 means
// 100 * n sweeps. On iteration exhaustion the best iterate is returned with
// converged == false; no throw.
fit_result project_cone(const std::vector<double>& y, const cone_spec& cone,
                        double tol = 1e-9, std::size_t max_iter = 0);

// maximal runs of approximately equal adjacent values
std::vector<fit_block> runs_of_equal(const std::vector<double>& v,
                                     double tol = 0.0);

// ---- stock cones ----

// theta_1 <= ... <= theta_n
cone_spec isotonic_cone(std::size_t n);

// theta_1 >= ... >= theta_m <= ... <= theta_n  (valley with floor at index m, 0-based)
cone_spec valley_cone(std::size_t n, std::size_t m);

// nonnegative divided differences of order 2 on design x (convex sequences)
cone_spec convex_cone(const std::vector<double>& x);

// nonnegative k-th forward differences on an equispaced design
cone_spec k_monotone_cone(std::size_t n, std::size_t k);

// theta_i <= theta_j for each directed edge (i, j)
cone_spec edge_cone(std::size_t n,
                    const std::vector<std::pair<std::size_t, std::size_t>>& edges);

}  // namespace shapereg
