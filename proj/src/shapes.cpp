#include "shapereg/shapes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "shapereg/errors.hpp"
#include "shapereg/isotonic.hpp"
#include "shapereg/kahan.hpp"

namespace shapereg {

// ---------------------------------------------------------------- unimodal

namespace {

// out[c] = least squares error of a nonincreasing fit to y[0..c).
// Single left-to-right pooling pass on -y; the error is tracked through
// sum(z^2) - sum over blocks of (block sum)^2 / weight.
std::vector<double> prefix_antitonic_sse(const std::vector<double>& y) {
  const std::size_t n = y.size();
  std::vector<double> out(n + 1, 0.0);
  struct blk {
    double sum, w, contrib;
  };
  std::vector<blk> stack;
  stack.reserve(n);
  kahan_sum zsq;
  double q = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double z = -y[i];
    stack.push_back({z, 1.0, z * z});
    q += z * z;
    while (stack.size() >= 2) {
      const blk& a = stack[stack.size() - 2];
      const blk& b = stack.back();
      if (!(a.sum * b.w >= b.sum * a.w)) break;
      q -= a.contrib + b.contrib;
      blk merged{a.sum + b.sum, a.w + b.w, 0.0};
      merged.contrib = merged.sum * merged.sum / merged.w;
      q += merged.contrib;
      stack.pop_back();
      stack.back() = merged;
    }
    zsq.add(y[i] * y[i]);
    out[i + 1] = std::max(0.0, zsq.value() - q);
  }
  return out;
}

}  // namespace

unimodal_fit fit_unimodal(const std::vector<double>& y) {
  if (y.empty()) throw empty_input("fit_unimodal: empty input");
  const std::size_t n = y.size();

  std::vector<double> a = prefix_antitonic_sse(y);
  std::vector<double> yr(y.rbegin(), y.rend());
  std::vector<double> b = prefix_antitonic_sse(yr);

  double best = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c <= n; ++c) best = std::min(best, a[c] + b[n - c]);
  const double tie = 1e-12 * (1.0 + sum_squares(y));

  unimodal_fit out;
  std::size_t best_mode = n;  // sentinel above any real mode
  for (std::size_t c = 0; c <= n; ++c) {
    if (!(a[c] + b[n - c] <= best + tie)) continue;
    std::vector<double> vals(n);
    if (c > 0) {
      std::vector<double> head(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(c));
      step_fit f = pava(head, {}, monotone_direction::nonincreasing);
      std::copy(f.values.begin(), f.values.end(), vals.begin());
    }
    if (c < n) {
      std::vector<double> tail(y.begin() + static_cast<std::ptrdiff_t>(c), y.end());
      step_fit f = pava(tail, {}, monotone_direction::nondecreasing);
      std::copy(f.values.begin(), f.values.end(), vals.begin() + static_cast<std::ptrdiff_t>(c));
    }
    std::size_t mode = 0;
    for (std::size_t i = 1; i < n; ++i)
      if (vals[i] < vals[mode]) mode = i;
    if (best_mode == n || mode < best_mode) {
      best_mode = mode;
      out.values = std::move(vals);
      out.mode = mode;
    }
    if (best_mode == 0) break;
  }
  kahan_sum sse;
  for (std::size_t i = 0; i < n; ++i) {
    double r = y[i] - out.values[i];
    sse.add(r * r);
  }
  out.sse = sse.value();
  return out;
}

// ------------------------------------------------------------ convex, 1-D

namespace {

double dd_at(const std::vector<double>& x, const std::vector<double>& th,
             std::size_t r) {
  double dl = x[r + 1] - x[r];
  double dr = x[r + 2] - x[r + 1];
  return (th[r + 2] - th[r + 1]) / dr - (th[r + 1] - th[r]) / dl;
}

double row_magnitude(const std::vector<double>& x, std::size_t r) {
  return 1.0 / (x[r + 1] - x[r]) + 1.0 / (x[r + 2] - x[r + 1]);
}

// SPD tridiagonal solve (Thomas): diag d, symmetric offdiag e, in place
std::vector<double> solve_tridiag(std::vector<double> d, std::vector<double> e,
                                  std::vector<double> b) {
  const std::size_t k = d.size();
  for (std::size_t t = 1; t < k; ++t) {
    if (!(d[t - 1] > 0.0)) throw invalid_input("tridiag: not positive definite");
    double m = e[t - 1] / d[t - 1];
    d[t] -= m * e[t - 1];
    b[t] -= m * b[t - 1];
  }
  std::vector<double> sol(k);
  if (!(d[k - 1] > 0.0)) throw invalid_input("tridiag: not positive definite");
  sol[k - 1] = b[k - 1] / d[k - 1];
  for (std::size_t t = k - 1; t-- > 0;) sol[t] = (b[t] - e[t] * sol[t + 1]) / d[t];
  return sol;
}

// SPD banded Cholesky solve, bandwidth 2. a0 diagonal, a1 first subdiagonal
// (a1[i] = A[i+1][i]), a2 second (a2[i] = A[i+2][i]).
std::vector<double> solve_band2(const std::vector<double>& a0,
                                const std::vector<double>& a1,
                                const std::vector<double>& a2,
                                std::vector<double> b) {
  const std::size_t m = a0.size();
  std::vector<double> l0(m), l1(m, 0.0), l2(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    if (i >= 2) l2[i] = a2[i - 2] / l0[i - 2];
    if (i >= 1) {
      double s = a1[i - 1];
      if (i >= 2) s -= l2[i] * l1[i - 1];
      l1[i] = s / l0[i - 1];
    }
    double s = a0[i] - l1[i] * l1[i] - l2[i] * l2[i];
    if (!(s > 0.0)) throw invalid_input("band2: not positive definite");
    l0[i] = std::sqrt(s);
  }
  // forward L z = b
  for (std::size_t i = 0; i < m; ++i) {
    double s = b[i];
    if (i >= 1) s -= l1[i] * b[i - 1];
    if (i >= 2) s -= l2[i] * b[i - 2];
    b[i] = s / l0[i];
  }
  // backward L^T x = z
  for (std::size_t i = m; i-- > 0;) {
    double s = b[i];
    if (i + 1 < m) s -= l1[i + 1] * b[i + 1];
    if (i + 2 < m) s -= l2[i + 2] * b[i + 2];
    b[i] = s / l0[i];
  }
  return b;
}

struct polish_outcome {
  std::vector<double> theta;
  std::vector<char> active;
  std::size_t iterations = 0;
  bool ok = false;
};

// Exact solve over the piecewise linear functions determined by the current
// active (zero curvature) rows, with primal and dual exchange until the KKT
// conditions hold. z and w are in normalized units.
polish_outcome polish_active_set(const std::vector<double>& x,
                                 const std::vector<double>& z,
                                 const std::vector<double>& w,
                                 std::vector<char> active) {
  const std::size_t n = x.size();
  const std::size_t m = n - 2;
  polish_outcome res;
  res.active = std::move(active);

  double zmax = 1.0;
  for (double v : z) zmax = std::max(zmax, std::abs(v));

  const std::size_t cap = 100 + 2 * m;
  std::vector<double> theta(n);
  for (std::size_t iter = 0; iter < cap; ++iter) {
    res.iterations = iter + 1;
    // knot set: endpoints plus interior points with a permitted kink
    std::vector<std::size_t> knots;
    knots.push_back(0);
    for (std::size_t r = 0; r < m; ++r)
      if (!res.active[r]) knots.push_back(r + 1);
    knots.push_back(n - 1);
    const std::size_t nk = knots.size();

    // weighted least squares on the hat basis over the knots; normal
    // equations are tridiagonal because hats overlap only adjacently
    std::vector<double> d(nk, 0.0), e(nk - 1, 0.0), rhs(nk, 0.0);
    {
      std::size_t t = 0;
      for (std::size_t i = 0; i < n; ++i) {
        while (t + 2 < nk && knots[t + 1] <= i) ++t;
        double wi = w.empty() ? 1.0 : w[i];
        if (i == knots[t]) {
          d[t] += wi;
          rhs[t] += wi * z[i];
        } else {
          double lam = (x[i] - x[knots[t]]) / (x[knots[t + 1]] - x[knots[t]]);
          double u = 1.0 - lam;
          d[t] += wi * u * u;
          d[t + 1] += wi * lam * lam;
          e[t] += wi * u * lam;
          rhs[t] += wi * u * z[i];
          rhs[t + 1] += wi * lam * z[i];
        }
      }
    }
    std::vector<double> c = solve_tridiag(d, e, rhs);
    {
      std::size_t t = 0;
      for (std::size_t i = 0; i < n; ++i) {
        while (t + 2 < nk && knots[t + 1] <= i) ++t;
        if (i == knots[t]) {
          theta[i] = c[t];
        } else {
          double lam = (x[i] - x[knots[t]]) / (x[knots[t + 1]] - x[knots[t]]);
          theta[i] = c[t] * (1.0 - lam) + c[t + 1] * lam;
        }
      }
    }

    // primal pass: kinks must curve the right way; activate violators
    bool violated = false;
    for (std::size_t r = 0; r < m; ++r) {
      if (res.active[r]) continue;
      double tol_r = 1e-9 * row_magnitude(x, r) * zmax;
      if (dd_at(x, theta, r) < -tol_r) {
        res.active[r] = 1;
        violated = true;
      }
    }
    if (violated) continue;

    // dual pass: multipliers of the active rows must be nonnegative
    std::vector<std::size_t> act;
    for (std::size_t r = 0; r < m; ++r)
      if (res.active[r]) act.push_back(r);
    if (act.empty()) {
      res.theta = theta;
      res.ok = true;
      return res;
    }
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i)
      g[i] = (w.empty() ? 1.0 : w[i]) * (z[i] - theta[i]);

    auto coef = [&](std::size_t r, std::size_t j) -> double {
      // row r of the constraint matrix: a . theta <= 0 encodes dd_r >= 0
      double dl = x[r + 1] - x[r], drr = x[r + 2] - x[r + 1];
      if (j == r) return -1.0 / dl;
      if (j == r + 1) return 1.0 / dl + 1.0 / drr;
      if (j == r + 2) return -1.0 / drr;
      return 0.0;
    };
    const std::size_t ma = act.size();
    std::vector<double> a0(ma, 0.0), a1(ma > 1 ? ma - 1 : 0, 0.0),
        a2(ma > 2 ? ma - 2 : 0, 0.0), rb(ma, 0.0);
    for (std::size_t p = 0; p < ma; ++p) {
      std::size_t r = act[p];
      for (std::size_t j = r; j <= r + 2; ++j) rb[p] += coef(r, j) * g[j];
      for (std::size_t qi = p; qi < ma && act[qi] <= r + 2; ++qi) {
        std::size_t r2 = act[qi];
        double s = 0.0;
        for (std::size_t j = r2; j <= r + 2; ++j) s += coef(r, j) * coef(r2, j);
        if (qi == p)
          a0[p] = s;
        else if (qi == p + 1)
          a1[p] = s;
        else if (qi == p + 2)
          a2[p] = s;
      }
    }
    std::vector<double> lam = solve_band2(a0, a1, a2, rb);
    double lmax = 0.0;
    for (double lv : lam) lmax = std::max(lmax, std::abs(lv));
    std::size_t worst = ma;
    double worst_val = -1e-9 * (1.0 + lmax);
    for (std::size_t p = 0; p < ma; ++p)
      if (lam[p] < worst_val) {
        worst_val = lam[p];
        worst = p;
      }
    if (worst == ma) {
      res.theta = theta;
      res.ok = true;
      return res;
    }
    res.active[act[worst]] = 0;
  }
  return res;  // iteration cap; caller falls back
}

cone_spec weighted_convex_cone(const std::vector<double>& x,
                               const std::vector<double>& sqw) {
  cone_spec base = convex_cone(x);
  if (sqw.empty()) return base;
  cone_spec c;
  c.n = base.n;
  for (const auto& row : base.rows) {
    std::vector<std::pair<std::size_t, double>> terms;
    terms.reserve(row.terms.size());
    for (const auto& [j, aj] : row.terms) terms.emplace_back(j, aj / sqw[j]);
    c.rows.push_back(make_row(std::move(terms)));
  }
  return c;
}

}  // namespace

fit_result fit_convex_weighted(const std::vector<double>& x,
                               const std::vector<double>& z,
                               const std::vector<double>& w, double tol,
                               std::size_t max_iter) {
  const std::size_t n = x.size();
  if (n == 0) throw empty_input("fit_convex_weighted: empty input");
  if (z.size() != n) throw dim_mismatch("fit_convex_weighted: length mismatch");
  if (!w.empty()) {
    if (w.size() != n) throw dim_mismatch("fit_convex_weighted: weight mismatch");
    for (double wi : w)
      if (!(wi > 0.0))
        throw invalid_input("fit_convex_weighted: weights must be positive");
  }
  for (std::size_t i = 1; i < n; ++i)
    if (!(x[i - 1] < x[i]))
      throw invalid_input("fit_convex_weighted: design must be strictly increasing");

  const cone_spec cone = convex_cone(x);

  auto finish = [&](std::vector<double> theta, std::size_t iters,
                    bool converged) {
    fit_result out;
    out.theta_hat = std::move(theta);
    kahan_sum sse;
    for (std::size_t i = 0; i < n; ++i) {
      double r = z[i] - out.theta_hat[i];
      sse.add((w.empty() ? 1.0 : w[i]) * r * r);
    }
    out.sse = sse.value();
    out.iterations = iters;
    out.converged = converged;
    // certificate in the inner product the projection was taken in
    {
      std::vector<double> resid(n);
      for (std::size_t i = 0; i < n; ++i)
        resid[i] = (w.empty() ? 1.0 : w[i]) * (z[i] - out.theta_hat[i]);
      double worst = std::abs(dot(resid, out.theta_hat));
      for (const auto& pr : cone.probe_directions) {
        kahan_sum acc;
        for (std::size_t i = 0; i < n; ++i)
          acc.add(resid[i] * (pr[i] - out.theta_hat[i]));
        worst = std::max(worst, acc.value());
      }
      out.kkt_residual = worst;
    }
    out.blocks = runs_of_equal(out.theta_hat);
    double zmax = 1.0;
    for (double v : z) zmax = std::max(zmax, std::abs(v));
    for (std::size_t r = 0; r + 2 < n; ++r)
      if (dd_at(x, out.theta_hat, r) > 1e-6 * row_magnitude(x, r) * zmax)
        out.knots.push_back(r + 1);
    return out;
  };

  if (n <= 2) return finish(std::vector<double>(z), 0, true);
  const std::size_t m = n - 2;

  double scale = 0.0;
  for (double v : z) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) return finish(std::vector<double>(n, 0.0), 0, true);

  std::vector<double> zn(n);
  for (std::size_t i = 0; i < n; ++i) zn[i] = z[i] / scale;

  // already convex: the projection is the identity
  bool feasible = true;
  for (std::size_t r = 0; r < m; ++r)
    if (dd_at(x, zn, r) < 0.0) {
      feasible = false;
      break;
    }
  if (feasible) return finish(std::vector<double>(z), 0, true);

  // Dykstra warm start, budgeted; it only needs to localize the active set
  std::vector<double> sqw;
  if (!w.empty()) {
    sqw.resize(n);
    for (std::size_t i = 0; i < n; ++i) sqw[i] = std::sqrt(w[i]);
  }
  std::size_t warm_sweeps =
      std::min<std::size_t>(100 * n, std::max<std::size_t>(
                                         300, 20000000 / (3 * n)));
  std::vector<double> warm;
  {
    cone_spec wcone = weighted_convex_cone(x, sqw);
    std::vector<double> zw(zn);
    if (!sqw.empty())
      for (std::size_t i = 0; i < n; ++i) zw[i] *= sqw[i];
    fit_result fr = project_cone(zw, wcone, 1e-8, warm_sweeps);
    warm = std::move(fr.theta_hat);
    if (!sqw.empty())
      for (std::size_t i = 0; i < n; ++i) warm[i] /= sqw[i];
  }

  std::vector<char> active(m, 0);
  for (std::size_t r = 0; r < m; ++r)
    if (dd_at(x, warm, r) <= 1e-6 * row_magnitude(x, r)) active[r] = 1;

  polish_outcome po;
  bool polish_failed = false;
  try {
    po = polish_active_set(x, zn, w, std::move(active));
  } catch (const invalid_input&) {
    polish_failed = true;  // singular system; fall back below
  }
  if (!polish_failed && po.ok) {
    std::vector<double> theta(n);
    for (std::size_t i = 0; i < n; ++i) theta[i] = po.theta[i] * scale;
    return finish(std::move(theta), warm_sweeps + po.iterations, true);
  }

  // honest fallback: run the generic solver to the requested tolerance
  cone_spec wcone = weighted_convex_cone(x, sqw);
  std::vector<double> zw(z);
  if (!sqw.empty())
    for (std::size_t i = 0; i < n; ++i) zw[i] *= sqw[i];
  fit_result fr = project_cone(zw, wcone, tol, max_iter);
  std::vector<double> theta = fr.theta_hat;
  if (!sqw.empty())
    for (std::size_t i = 0; i < n; ++i) theta[i] /= sqw[i];
  fit_result out = finish(std::move(theta), warm_sweeps + fr.iterations,
                          fr.converged);
  return out;
}

fit_result fit_convex1d(const series& s, double tol, std::size_t max_iter) {
  validate(s);
  return fit_convex_weighted(s.x, s.y, {}, tol, max_iter);
}

double verify_convex_characterization(const series& s, const fit_result& fit) {
  validate(s);
  const std::size_t n = s.size();
  if (fit.theta_hat.size() != n)
    throw dim_mismatch("verify_convex_characterization: length mismatch");
  const double dn = static_cast<double>(n);

  // first level: cumulative means of fit and data
  std::vector<double> ct(n), cf(n);
  {
    kahan_sum at, af;
    for (std::size_t i = 0; i < n; ++i) {
      at.add(fit.theta_hat[i]);
      af.add(s.y[i]);
      ct[i] = at.value() / dn;
      cf[i] = af.value() / dn;
    }
  }
  // second level: running sums of the first level
  std::vector<double> pt(n + 1, 0.0), pf(n + 1, 0.0);
  {
    kahan_sum at, af;
    for (std::size_t i = 0; i < n; ++i) {
      at.add(ct[i]);
      af.add(cf[i]);
      pt[i + 1] = at.value();
      pf[i + 1] = af.value();
    }
  }

  double worst = std::abs(ct[n - 1] - cf[n - 1]);  // total masses agree
  for (std::size_t j = 2; j <= n; ++j)
    worst = std::max(worst, pf[j - 1] - pt[j - 1]);  // dominance
  for (std::size_t p : fit.knots)
    if (p >= 1 && p + 1 < n)
      worst = std::max(worst, std::abs(pt[p] - pf[p]));  // tight at kinks
  worst = std::max(worst, std::abs(pt[n - 1] - pf[n - 1]));
  return worst;
}

fit_result fit_k_monotone(const std::vector<double>& y, std::size_t k,
                          double tol, std::size_t max_iter) {
  if (y.empty()) throw empty_input("fit_k_monotone: empty input");
  if (k == 0) throw invalid_input("fit_k_monotone: order must be positive");
  if (k >= y.size())
    throw bad_order("fit_k_monotone: order must be below the sample size");
  cone_spec cone = k_monotone_cone(y.size(), k);
  return project_cone(y, cone, tol, max_iter);
}

matrix_fit fit_matrix_isotonic(const matrix_data& y, double tol,
                               std::size_t max_iter) {
  if (y.n1 == 0 || y.n2 == 0) throw empty_input("fit_matrix_isotonic: empty input");
  if (y.a.size() != y.n1 * y.n2)
    throw dim_mismatch("fit_matrix_isotonic: shape and storage disagree");
  const std::size_t n1 = y.n1, n2 = y.n2, sz = n1 * n2;
  if (max_iter == 0) max_iter = 200 + 100 * (n1 + n2);

  matrix_fit out;
  out.n1 = n1;
  out.n2 = n2;

  double scale = 0.0;
  for (double v : y.a) scale = std::max(scale, std::abs(v));
  if (scale == 0.0 || (n1 == 1 && n2 == 1)) {
    out.theta_hat = y.a;
    out.sse = 0.0;
    out.kkt_residual = 0.0;
    out.iterations = 0;
    out.converged = true;
    return out;
  }

  std::vector<double> x(sz), p(sz, 0.0), q(sz, 0.0), prev(sz);
  for (std::size_t i = 0; i < sz; ++i) x[i] = y.a[i] / scale;
  prev = x;

  auto violation = [&]() {
    double v = 0.0;
    for (std::size_t i = 0; i < n1; ++i)
      for (std::size_t j = 0; j + 1 < n2; ++j)
        v = std::max(v, x[i * n2 + j] - x[i * n2 + j + 1]);
    for (std::size_t i = 0; i + 1 < n1; ++i)
      for (std::size_t j = 0; j < n2; ++j)
        v = std::max(v, x[i * n2 + j] - x[(i + 1) * n2 + j]);
    return v;
  };

  std::size_t sweeps = 0;
  bool converged = false;
  std::vector<double> buf;
  while (sweeps < max_iter) {
    // rows cone
    for (std::size_t i = 0; i < n1; ++i) {
      buf.assign(n2, 0.0);
      for (std::size_t j = 0; j < n2; ++j) buf[j] = x[i * n2 + j] + p[i * n2 + j];
      step_fit f = pava(buf);
      for (std::size_t j = 0; j < n2; ++j) {
        p[i * n2 + j] = buf[j] - f.values[j];
        x[i * n2 + j] = f.values[j];
      }
    }
    // columns cone
    for (std::size_t j = 0; j < n2; ++j) {
      buf.assign(n1, 0.0);
      for (std::size_t i = 0; i < n1; ++i) buf[i] = x[i * n2 + j] + q[i * n2 + j];
      step_fit f = pava(buf);
      for (std::size_t i = 0; i < n1; ++i) {
        q[i * n2 + j] = buf[i] - f.values[i];
        x[i * n2 + j] = f.values[i];
      }
    }
    ++sweeps;
    double gap = 0.0;
    for (std::size_t i = 0; i < sz; ++i)
      gap = std::max(gap, std::abs(x[i] - prev[i]));
    if (gap <= tol && violation() <= tol) {
      converged = true;
      break;
    }
    prev = x;
  }

  out.theta_hat.resize(sz);
  for (std::size_t i = 0; i < sz; ++i) out.theta_hat[i] = x[i] * scale;
  out.sse = sse_between(y.a, out.theta_hat);
  out.iterations = sweeps;
  out.converged = converged;

  std::vector<std::vector<double>> probes;
  probes.emplace_back(sz, 1.0);
  probes.emplace_back(sz, -1.0);
  std::vector<double> ramp(sz);
  for (std::size_t i = 0; i < n1; ++i)
    for (std::size_t j = 0; j < n2; ++j)
      ramp[i * n2 + j] = static_cast<double>(i + j);
  probes.push_back(std::move(ramp));
  out.kkt_residual = verify_projection(y.a, out.theta_hat, probes);
  return out;
}

}  // namespace shapereg
