#pragma once

#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

#include "shapereg/cone.hpp"

namespace shapereg {

using point = std::vector<double>;

enum class order_kind { coordinatewise, weak_majorization, explicit_edges };

struct order_relation {
  order_kind kind = order_kind::coordinatewise;
  // directed comparabilities (i before j means theta_i <= theta_j);
  // only read when kind == explicit_edges
  std::vector<std::pair<std::size_t, std::size_t>> edges;
};

// u below v in every coordinate
bool coordinatewise_leq(const point& u, const point& v);

// every prefix sum of u below the matching prefix sum of v, coordinates
// taken in their given order
bool weak_majorization_leq(const point& u, const point& v);

struct po_fit {
  std::vector<point> points;
  std::vector<double> theta_hat;
  order_relation order;
  double sse = 0.0;
  double kkt_residual = 0.0;
  std::size_t iterations = 0;
  bool converged = true;
  // reachability of the order restricted to the sample, row-major n x n;
  // closure[i * n + j] != 0 means point i is below point j
  std::vector<char> closure;
};

// Least squares fit of y constrained to respect the partial order on the
// sample points: theta_i <= theta_j whenever point i is below point j.
// Comparabilities are reduced transitively before building constraint rows.
// explicit_edges orders are checked for cycles (cyclic_order).
po_fit fit_isotonic_po(const std::vector<point>& points,
                       const std::vector<double>& y,
                       const order_relation& order, double tol = 1e-9,
                       std::size_t max_iter = 0);

// Largest fitted value over sample points below x; -infinity when no sample
// point is below x. For explicit_edges orders, x participates only if it
// coincides with a sample point.
double extend_fit(const po_fit& fit, const point& x);

// True when, at every sample, the gradient components are nonincreasing in
// the coordinate index and the last one is nonnegative.
bool check_gradient_order_preserving(
    const std::function<point(const point&)>& grad,
    const std::vector<point>& samples);

// Shift eps from coordinate k+1 to coordinate k (for the last coordinate,
// just add eps). Functions with order-preserving gradients are monotone
// along this path.
point transfer(const point& z, std::size_t k, double eps);

}  // namespace shapereg
