#include "shapereg/cone.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "shapereg/errors.hpp"
#include "shapereg/kahan.hpp"

namespace shapereg {

sparse_row make_row(std::vector<std::pair<std::size_t, double>> terms) {
  sparse_row r;
  r.terms = std::move(terms);
  kahan_sum n2;
  for (const auto& [i, a] : r.terms) n2.add(a * a);
  r.norm2 = n2.value();
  return r;
}

double verify_projection(const std::vector<double>& y,
                         const std::vector<double>& theta_hat,
                         const std::vector<std::vector<double>>& probes,
                         bool cone_through_origin) {
  if (y.size() != theta_hat.size())
    throw dim_mismatch("verify_projection: length mismatch");
  std::vector<double> resid(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) resid[i] = y[i] - theta_hat[i];

  double worst = 0.0;
  if (cone_through_origin) {
    // <resid, theta_hat> must vanish: theta_hat and 2*theta_hat are both
    // feasible, so the inner product is pinched from both sides.
    worst = std::abs(dot(resid, theta_hat));
  }
  for (const auto& p : probes) {
    if (p.size() != y.size())
      throw dim_mismatch("verify_projection: probe length mismatch");
    kahan_sum acc;
    for (std::size_t i = 0; i < y.size(); ++i)
      acc.add(resid[i] * (p[i] - theta_hat[i]));
    worst = std::max(worst, acc.value());
  }
  return worst;
}

namespace {

double row_dot(const sparse_row& r, const std::vector<double>& x) {
  kahan_sum acc;
  for (const auto& [i, a] : r.terms) acc.add(a * x[i]);
  return acc.value();
}

double max_violation(const cone_spec& cone, const std::vector<double>& x) {
  double v = 0.0;
  for (const auto& r : cone.rows) v = std::max(v, row_dot(r, x));
  return v;
}

}  // namespace

std::vector<fit_block> runs_of_equal(const std::vector<double>& v, double tol) {
  std::vector<fit_block> blocks;
  std::size_t lo = 0;
  for (std::size_t i = 1; i <= v.size(); ++i) {
    if (i == v.size() || std::abs(v[i] - v[i - 1]) > tol) {
      blocks.push_back({lo, i - 1, v[lo]});
      lo = i;
    }
  }
  return blocks;
}

fit_result project_cone(const std::vector<double>& y, const cone_spec& cone,
                        double tol, std::size_t max_iter) {
  const std::size_t n = y.size();
  if (n == 0) throw empty_input("project_cone: empty input");
  if (cone.n != n) throw dim_mismatch("project_cone: cone dimension mismatch");
  for (const auto& r : cone.rows)
    for (const auto& [i, a] : r.terms) {
      (void)a;
      if (i >= n) throw index_out_of_range("project_cone: row index out of range");
    }
  if (max_iter == 0) max_iter = 100 * n;

  fit_result out;
  const double scale = [&] {
    double m = 0.0;
    for (double v : y) m = std::max(m, std::abs(v));
    return m;
  }();

  if (cone.rows.empty() || scale == 0.0) {
    // nothing to enforce, or y == 0 which lies in every cone through 0
    out.theta_hat = y;
    out.sse = 0.0;
    out.kkt_residual = 0.0;
    out.iterations = 0;
    out.converged = true;
    out.blocks = runs_of_equal(out.theta_hat);
    return out;
  }

  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = y[i] / scale;

  // Dykstra with one scalar correction per halfspace: the increment for row
  // r is always c_r * a_r with c_r >= 0, so only c_r is stored.
  std::vector<double> corr(cone.rows.size(), 0.0);
  std::vector<double> x_prev(x);
  std::size_t sweeps = 0;
  bool converged = false;

  while (sweeps < max_iter) {
    for (std::size_t r = 0; r < cone.rows.size(); ++r) {
      const sparse_row& row = cone.rows[r];
      if (row.norm2 == 0.0) continue;
      // z = x + correction, then project z onto {a . t <= 0}
      double v = row_dot(row, x) + corr[r] * row.norm2;
      if (v > 0.0) {
        double step = v / row.norm2;
        for (const auto& [i, a] : row.terms) x[i] += (corr[r] - step) * a;
        corr[r] = step;
      } else {
        if (corr[r] != 0.0)
          for (const auto& [i, a] : row.terms) x[i] += corr[r] * a;
        corr[r] = 0.0;
      }
    }
    ++sweeps;
    double gap = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      gap = std::max(gap, std::abs(x[i] - x_prev[i]));
    if (gap <= tol && max_violation(cone, x) <= tol) {
      converged = true;
      break;
    }
    x_prev = x;
  }

  out.theta_hat.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.theta_hat[i] = x[i] * scale;
  out.sse = sse_between(y, out.theta_hat);
  out.iterations = sweeps;
  out.converged = converged;
  out.kkt_residual =
      verify_projection(y, out.theta_hat, cone.probe_directions);
  out.blocks = runs_of_equal(out.theta_hat, tol * scale);
  return out;
}

cone_spec isotonic_cone(std::size_t n) {
  cone_spec c;
  c.n = n;
  for (std::size_t i = 0; i + 1 < n; ++i)
    c.rows.push_back(make_row({{i, 1.0}, {i + 1, -1.0}}));
  c.probe_directions.push_back(std::vector<double>(n, 1.0));
  c.probe_directions.push_back(std::vector<double>(n, -1.0));
  std::vector<double> ramp(n);
  for (std::size_t i = 0; i < n; ++i) ramp[i] = static_cast<double>(i);
  c.probe_directions.push_back(ramp);
  return c;
}

cone_spec valley_cone(std::size_t n, std::size_t m) {
  if (m >= n) throw index_out_of_range("valley_cone: floor index out of range");
  cone_spec c;
  c.n = n;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (i + 1 <= m)
      c.rows.push_back(make_row({{i + 1, 1.0}, {i, -1.0}}));  // decreasing leg
    else
      c.rows.push_back(make_row({{i, 1.0}, {i + 1, -1.0}}));  // increasing leg
  }
  c.probe_directions.push_back(std::vector<double>(n, 1.0));
  c.probe_directions.push_back(std::vector<double>(n, -1.0));
  std::vector<double> vee(n);
  for (std::size_t i = 0; i < n; ++i) {
    double d = i >= m ? static_cast<double>(i - m) : static_cast<double>(m - i);
    vee[i] = d;
  }
  c.probe_directions.push_back(vee);
  return c;
}

cone_spec convex_cone(const std::vector<double>& x) {
  const std::size_t n = x.size();
  for (std::size_t i = 1; i < n; ++i)
    if (!(x[i - 1] < x[i]))
      throw invalid_input("convex_cone: design must be strictly increasing");
  cone_spec c;
  c.n = n;
  for (std::size_t i = 0; i + 2 < n; ++i) {
    double dl = x[i + 1] - x[i];
    double dr = x[i + 2] - x[i + 1];
    // slope(i, i+1) - slope(i+1, i+2) <= 0
    c.rows.push_back(make_row(
        {{i, -1.0 / dl}, {i + 1, 1.0 / dl + 1.0 / dr}, {i + 2, -1.0 / dr}}));
  }
  c.probe_directions.push_back(std::vector<double>(n, 1.0));
  c.probe_directions.push_back(std::vector<double>(n, -1.0));
  std::vector<double> lin(x), neg(n), sq(n);
  for (std::size_t i = 0; i < n; ++i) {
    neg[i] = -x[i];
    sq[i] = x[i] * x[i];
  }
  c.probe_directions.push_back(lin);
  c.probe_directions.push_back(neg);
  c.probe_directions.push_back(sq);
  return c;
}

cone_spec k_monotone_cone(std::size_t n, std::size_t k) {
  if (k == 0) throw invalid_input("k_monotone_cone: order must be positive");
  if (k >= n) throw bad_order("k_monotone_cone: order must be below length");
  // Pascal row for binomial coefficients C(k, j)
  std::vector<double> binom(k + 1, 0.0);
  binom[0] = 1.0;
  for (std::size_t row = 1; row <= k; ++row)
    for (std::size_t j = row; j > 0; --j) binom[j] += binom[j - 1];

  cone_spec c;
  c.n = n;
  for (std::size_t i = 0; i + k < n; ++i) {
    std::vector<std::pair<std::size_t, double>> terms;
    terms.reserve(k + 1);
    // forward difference of order k at i must be >= 0
    for (std::size_t j = 0; j <= k; ++j) {
      double sign = ((k - j) % 2 == 0) ? 1.0 : -1.0;
      terms.emplace_back(i + j, -sign * binom[j]);
    }
    c.rows.push_back(make_row(std::move(terms)));
  }
  c.probe_directions.push_back(std::vector<double>(n, 1.0));
  c.probe_directions.push_back(std::vector<double>(n, -1.0));
  // i^j is k-monotone for j <= k; include a few low-order ones
  for (std::size_t deg = 1; deg <= std::min<std::size_t>(k, 3); ++deg) {
    std::vector<double> p(n);
    for (std::size_t i = 0; i < n; ++i)
      p[i] = std::pow(static_cast<double>(i), static_cast<double>(deg));
    c.probe_directions.push_back(p);
  }
  return c;
}

cone_spec edge_cone(
    std::size_t n,
    const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  cone_spec c;
  c.n = n;
  for (const auto& [i, j] : edges) {
    if (i >= n || j >= n)
      throw index_out_of_range("edge_cone: edge endpoint out of range");
    c.rows.push_back(make_row({{i, 1.0}, {j, -1.0}}));
  }
  c.probe_directions.push_back(std::vector<double>(n, 1.0));
  c.probe_directions.push_back(std::vector<double>(n, -1.0));
  return c;
}

}  // namespace shapereg
