#include "shapereg/partial_order.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "shapereg/errors.hpp"
#include "shapereg/kahan.hpp"

namespace shapereg {

bool coordinatewise_leq(const point& u, const point& v) {
  if (u.size() != v.size())
    throw dim_mismatch("coordinatewise_leq: dimension mismatch");
  for (std::size_t i = 0; i < u.size(); ++i)
    if (!(u[i] <= v[i])) return false;
  return true;
}

bool weak_majorization_leq(const point& u, const point& v) {
  if (u.size() != v.size())
    throw dim_mismatch("weak_majorization_leq: dimension mismatch");
  kahan_sum su, sv;
  for (std::size_t i = 0; i < u.size(); ++i) {
    su.add(u[i]);
    sv.add(v[i]);
    if (!(su.value() <= sv.value())) return false;
  }
  return true;
}

namespace {

bool points_equal(const point& a, const point& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] != b[i]) return false;
  return true;
}

// reachability closure over an adjacency list, one BFS per source
std::vector<char> closure_of(std::size_t n,
                             const std::vector<std::vector<std::size_t>>& adj) {
  std::vector<char> reach(n * n, 0);
  std::vector<std::size_t> queue;
  for (std::size_t s = 0; s < n; ++s) {
    queue.clear();
    queue.push_back(s);
    reach[s * n + s] = 1;
    while (!queue.empty()) {
      std::size_t u = queue.back();
      queue.pop_back();
      for (std::size_t v : adj[u])
        if (!reach[s * n + v]) {
          reach[s * n + v] = 1;
          queue.push_back(v);
        }
    }
  }
  return reach;
}

}  // namespace

po_fit fit_isotonic_po(const std::vector<point>& points,
                       const std::vector<double>& y,
                       const order_relation& order, double tol,
                       std::size_t max_iter) {
  const std::size_t n = points.size();
  if (n == 0) throw empty_input("fit_isotonic_po: no points");
  if (y.size() != n) throw dim_mismatch("fit_isotonic_po: y length mismatch");
  const std::size_t d = points[0].size();
  if (d == 0) throw empty_input("fit_isotonic_po: zero-dimensional points");
  for (const auto& p : points)
    if (p.size() != d) throw dim_mismatch("fit_isotonic_po: ragged points");
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (points_equal(points[i], points[j]))
        throw invalid_input("fit_isotonic_po: points must be distinct");

  // comparability closure; cls[i*n+j] set means theta_i <= theta_j required
  std::vector<char> cls;
  if (order.kind == order_kind::explicit_edges) {
    std::vector<std::vector<std::size_t>> adj(n);
    for (const auto& [i, j] : order.edges) {
      if (i >= n || j >= n)
        throw index_out_of_range("fit_isotonic_po: edge endpoint out of range");
      if (i != j) adj[i].push_back(j);
    }
    cls = closure_of(n, adj);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (cls[i * n + j] && cls[j * n + i])
          throw cyclic_order("fit_isotonic_po: order contains a cycle");
  } else {
    auto leq = order.kind == order_kind::coordinatewise ? coordinatewise_leq
                                                        : weak_majorization_leq;
    cls.assign(n * n, 0);
    for (std::size_t i = 0; i < n; ++i) {
      cls[i * n + i] = 1;
      for (std::size_t j = 0; j < n; ++j)
        if (i != j && leq(points[i], points[j])) cls[i * n + j] = 1;
    }
    // distinct points make both comparators antisymmetric, so no cycles
  }

  // transitive reduction: drop (i, j) when a strictly intermediate k links them
  std::vector<std::pair<std::size_t, std::size_t>> kept;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j || !cls[i * n + j]) continue;
      bool redundant = false;
      for (std::size_t k = 0; k < n && !redundant; ++k)
        if (k != i && k != j && cls[i * n + k] && cls[k * n + j])
          redundant = true;
      if (!redundant) kept.emplace_back(i, j);
    }

  cone_spec cone = edge_cone(n, kept);
  fit_result fr = project_cone(y, cone, tol, max_iter);

  po_fit out;
  out.points = points;
  out.theta_hat = std::move(fr.theta_hat);
  out.order = order;
  out.sse = fr.sse;
  out.kkt_residual = fr.kkt_residual;
  out.iterations = fr.iterations;
  out.converged = fr.converged;
  out.closure = std::move(cls);
  return out;
}

double extend_fit(const po_fit& fit, const point& x) {
  const std::size_t n = fit.points.size();
  double best = -std::numeric_limits<double>::infinity();
  if (fit.order.kind == order_kind::explicit_edges) {
    for (std::size_t i = 0; i < n; ++i)
      if (points_equal(fit.points[i], x)) {
        for (std::size_t j = 0; j < n; ++j)
          if (fit.closure[j * n + i]) best = std::max(best, fit.theta_hat[j]);
        break;
      }
    return best;
  }
  auto leq = fit.order.kind == order_kind::coordinatewise
                 ? coordinatewise_leq
                 : weak_majorization_leq;
  for (std::size_t j = 0; j < n; ++j)
    if (leq(fit.points[j], x)) best = std::max(best, fit.theta_hat[j]);
  return best;
}

bool check_gradient_order_preserving(
    const std::function<point(const point&)>& grad,
    const std::vector<point>& samples) {
  for (const auto& z : samples) {
    point g = grad(z);
    if (g.size() != z.size())
      throw dim_mismatch("check_gradient_order_preserving: gradient dimension");
    if (g.empty()) continue;
    for (std::size_t i = 0; i + 1 < g.size(); ++i)
      if (!(g[i] >= g[i + 1])) return false;
    if (!(g.back() >= 0.0)) return false;
  }
  return true;
}

point transfer(const point& z, std::size_t k, double eps) {
  if (k >= z.size()) throw index_out_of_range("transfer: coordinate out of range");
  point out = z;
  out[k] += eps;
  if (k + 1 < z.size()) out[k + 1] -= eps;
  return out;
}

}  // namespace shapereg
