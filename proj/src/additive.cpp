#include "shapereg/additive.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "shapereg/errors.hpp"
#include "shapereg/kahan.hpp"
#include "shapereg/rng.hpp"
#include "shapereg/shapes.hpp"

namespace shapereg {

namespace {

struct pooled_axis {
  std::vector<double> xs;        // distinct coordinate values, ascending
  std::vector<double> w;         // multiplicities
  std::vector<std::size_t> idx;  // observation -> slot in xs
};

pooled_axis pool_coordinate(const std::vector<point>& X, std::size_t k) {
  const std::size_t n = X.size();
  std::vector<std::size_t> ord(n);
  std::iota(ord.begin(), ord.end(), 0);
  std::sort(ord.begin(), ord.end(),
            [&](std::size_t a, std::size_t b) { return X[a][k] < X[b][k]; });
  pooled_axis p;
  p.idx.resize(n);
  for (std::size_t r = 0; r < n; ++r) {
    double v = X[ord[r]][k];
    if (p.xs.empty() || v != p.xs.back()) {
      p.xs.push_back(v);
      p.w.push_back(0.0);
    }
    p.w.back() += 1.0;
    p.idx[ord[r]] = p.xs.size() - 1;
  }
  return p;
}

std::vector<double> shape_fit_1d(shape1d shape, const std::vector<double>& xs,
                                 const std::vector<double>& z,
                                 const std::vector<double>& w) {
  switch (shape) {
    case shape1d::nondecreasing:
      return pava(z, w, monotone_direction::nondecreasing).values;
    case shape1d::nonincreasing:
      return pava(z, w, monotone_direction::nonincreasing).values;
    case shape1d::convex:
      return fit_convex_weighted(xs, z, w).theta_hat;
  }
  throw invalid_input("shape_fit_1d: unknown shape");
}

// subtract the design-weighted mean; returns the constant removed
double center(std::vector<double>& vals, const std::vector<double>& w,
              double n) {
  kahan_sum acc;
  for (std::size_t u = 0; u < vals.size(); ++u) acc.add(w[u] * vals[u]);
  double c = acc.value() / n;
  for (double& v : vals) v -= c;
  return c;
}

}  // namespace

double component_at(const component_fit& f, double x) {
  auto it = std::lower_bound(f.xs.begin(), f.xs.end(), x);
  if (it == f.xs.end() || *it != x)
    throw out_of_domain("component_at: not a design value");
  return f.values[static_cast<std::size_t>(it - f.xs.begin())];
}

additive_fit backfit_additive(const std::vector<point>& X,
                              const std::vector<double>& y,
                              const std::vector<shape1d>& shapes, double tol,
                              std::size_t max_cycles) {
  const std::size_t n = X.size();
  if (n == 0) throw empty_input("backfit_additive: no observations");
  if (y.size() != n) throw dim_mismatch("backfit_additive: y length mismatch");
  const std::size_t d = shapes.size();
  if (d == 0) throw empty_input("backfit_additive: no coordinates");
  for (const auto& row : X)
    if (row.size() != d) throw dim_mismatch("backfit_additive: ragged design");
  if (n < d) throw invalid_input("backfit_additive: fewer observations than coordinates");

  std::vector<pooled_axis> axes(d);
  for (std::size_t k = 0; k < d; ++k) axes[k] = pool_coordinate(X, k);

  additive_fit out;
  out.mu_hat = sum(y) / static_cast<double>(n);

  std::vector<std::vector<double>> fv(d);
  for (std::size_t k = 0; k < d; ++k) fv[k].assign(axes[k].xs.size(), 0.0);

  std::vector<double> resid(n);
  for (std::size_t i = 0; i < n; ++i) resid[i] = y[i] - out.mu_hat;

  auto recompute_resid = [&]() {
    for (std::size_t i = 0; i < n; ++i) {
      double acc = y[i] - out.mu_hat;
      for (std::size_t k = 0; k < d; ++k) acc -= fv[k][axes[k].idx[i]];
      resid[i] = acc;
    }
  };

  double prev_sse = sum_squares(resid);
  out.converged = false;
  std::size_t cycle = 0;
  while (cycle < max_cycles) {
    ++cycle;
    for (std::size_t k = 0; k < d; ++k) {
      const pooled_axis& ax = axes[k];
      // pooled means of the partial residuals for coordinate k
      std::vector<double> z(ax.xs.size(), 0.0);
      for (std::size_t i = 0; i < n; ++i) z[ax.idx[i]] += resid[i];
      for (std::size_t u = 0; u < z.size(); ++u)
        z[u] = z[u] / ax.w[u] + fv[k][u];
      std::vector<double> vals = shape_fit_1d(shapes[k], ax.xs, z, ax.w);
      center(vals, ax.w, static_cast<double>(n));
      for (std::size_t i = 0; i < n; ++i)
        resid[i] += fv[k][ax.idx[i]] - vals[ax.idx[i]];
      fv[k] = std::move(vals);
    }
    recompute_resid();  // undo incremental drift before the stop test
    double sse = sum_squares(resid);
    double gain = prev_sse - sse;
    prev_sse = sse;
    if (gain < tol) {
      out.converged = true;
      break;
    }
  }
  out.cycles = cycle;
  out.sse = prev_sse;
  out.components.resize(d);
  for (std::size_t k = 0; k < d; ++k) {
    out.components[k].shape = shapes[k];
    out.components[k].xs = axes[k].xs;
    out.components[k].values = fv[k];
    out.components[k].weights = axes[k].w;
  }
  return out;
}

component_fit oracle_component(
    const std::vector<point>& X, const std::vector<double>& y, std::size_t k,
    const std::vector<std::function<double(double)>>& others, double mu_star,
    shape1d shape) {
  const std::size_t n = X.size();
  if (n == 0) throw empty_input("oracle_component: no observations");
  if (y.size() != n) throw dim_mismatch("oracle_component: y length mismatch");
  const std::size_t d = X[0].size();
  if (k >= d) throw index_out_of_range("oracle_component: coordinate out of range");
  if (others.size() != d)
    throw dim_mismatch("oracle_component: one function per coordinate expected");

  pooled_axis ax = pool_coordinate(X, k);
  std::vector<double> z(ax.xs.size(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double v = y[i] - mu_star;
    for (std::size_t j = 0; j < d; ++j)
      if (j != k) v -= others[j](X[i][j]);
    z[ax.idx[i]] += v;
  }
  for (std::size_t u = 0; u < z.size(); ++u) z[u] /= ax.w[u];

  component_fit out;
  out.shape = shape;
  out.xs = ax.xs;
  out.values = shape_fit_1d(shape, ax.xs, z, ax.w);
  out.weights = ax.w;
  center(out.values, ax.w, static_cast<double>(n));
  return out;
}

// ---- monotone single index ----

namespace {

double radical_inverse(std::uint64_t base, std::uint64_t m) {
  double f = 1.0 / static_cast<double>(base);
  double r = 0.0;
  while (m > 0) {
    r += static_cast<double>(m % base) * f;
    m /= base;
    f /= static_cast<double>(base);
  }
  return r;
}

std::vector<std::uint64_t> first_primes(std::size_t count) {
  std::vector<std::uint64_t> primes;
  for (std::uint64_t c = 2; primes.size() < count; ++c) {
    bool ok = true;
    for (std::uint64_t p : primes) {
      if (p * p > c) break;
      if (c % p == 0) {
        ok = false;
        break;
      }
    }
    if (ok) primes.push_back(c);
  }
  return primes;
}

bool normalize(std::vector<double>& v) {
  double n2 = 0.0;
  for (double x : v) n2 += x * x;
  if (!(n2 > 0.0)) return false;
  double inv = 1.0 / std::sqrt(n2);
  for (double& x : v) x *= inv;
  return true;
}

struct profile_eval {
  bool degenerate = true;
  double sse = 0.0;
  step_fit psi;
};

profile_eval profile_direction(const std::vector<point>& X,
                               const std::vector<double>& y,
                               const std::vector<double>& beta) {
  const std::size_t n = X.size();
  profile_eval out;
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) {
    kahan_sum acc;
    for (std::size_t j = 0; j < beta.size(); ++j) acc.add(beta[j] * X[i][j]);
    t[i] = acc.value();
  }
  double tmin = *std::min_element(t.begin(), t.end());
  double tmax = *std::max_element(t.begin(), t.end());
  if (tmin == tmax) return out;  // all projections equal
  out.degenerate = false;

  std::vector<std::size_t> ord(n);
  std::iota(ord.begin(), ord.end(), 0);
  std::sort(ord.begin(), ord.end(),
            [&](std::size_t a, std::size_t b) { return t[a] < t[b]; });

  // pool exactly equal projections
  std::vector<double> xs, z, w;
  std::vector<std::size_t> slot(n);
  for (std::size_t r = 0; r < n; ++r) {
    std::size_t i = ord[r];
    if (xs.empty() || t[i] != xs.back()) {
      xs.push_back(t[i]);
      z.push_back(0.0);
      w.push_back(0.0);
    }
    z.back() += y[i];
    w.back() += 1.0;
    slot[i] = xs.size() - 1;
  }
  for (std::size_t u = 0; u < z.size(); ++u) z[u] /= w[u];

  step_fit f = pava(z, w);
  f.xs = xs;
  out.psi = std::move(f);
  kahan_sum sse;
  for (std::size_t i = 0; i < n; ++i) {
    double r = y[i] - out.psi.values[slot[i]];
    sse.add(r * r);
  }
  out.sse = sse.value();
  return out;
}

}  // namespace

double single_index_sse(const std::vector<point>& X,
                        const std::vector<double>& y,
                        const std::vector<double>& beta, const step_fit& psi) {
  kahan_sum acc;
  for (std::size_t i = 0; i < X.size(); ++i) {
    kahan_sum tp;
    for (std::size_t j = 0; j < beta.size(); ++j) tp.add(beta[j] * X[i][j]);
    double r = y[i] - eval_step(psi, tp.value());
    acc.add(r * r);
  }
  return acc.value();
}

single_index_fit fit_monotone_single_index(const std::vector<point>& X,
                                           const std::vector<double>& y,
                                           std::size_t n_candidates,
                                           std::size_t refine_steps) {
  const std::size_t n = X.size();
  if (n == 0) throw empty_input("fit_monotone_single_index: no observations");
  if (y.size() != n)
    throw dim_mismatch("fit_monotone_single_index: y length mismatch");
  const std::size_t d = X[0].size();
  for (const auto& row : X)
    if (row.size() != d)
      throw dim_mismatch("fit_monotone_single_index: ragged design");
  if (d < 2)
    throw invalid_input("fit_monotone_single_index: need at least two coordinates");
  if (n < 3)
    throw invalid_input("fit_monotone_single_index: need at least three observations");

  const double two_pi = 8.0 * std::atan(1.0);
  std::vector<std::vector<double>> grid;
  if (d == 2) {
    std::size_t g = n_candidates ? n_candidates : 720;
    grid.reserve(g);
    for (std::size_t i = 0; i < g; ++i) {
      double phi = two_pi * static_cast<double>(i) / static_cast<double>(g);
      grid.push_back({std::cos(phi), std::sin(phi)});
    }
  } else {
    std::size_t g = n_candidates ? n_candidates : 512;
    std::vector<std::uint64_t> primes = first_primes(d);
    grid.reserve(g);
    for (std::size_t i = 0; i < g; ++i) {
      std::vector<double> v(d);
      for (std::size_t j = 0; j < d; ++j)
        v[j] = normal_icdf(radical_inverse(primes[j], i + 1));
      if (normalize(v)) grid.push_back(std::move(v));
    }
  }

  single_index_fit best;
  bool found = false;
  double best_sse = std::numeric_limits<double>::infinity();
  for (const auto& beta : grid) {
    profile_eval pe = profile_direction(X, y, beta);
    if (pe.degenerate) continue;
    if (!found || pe.sse < best_sse) {
      found = true;
      best_sse = pe.sse;
      best.beta_hat = beta;
      best.psi_hat = std::move(pe.psi);
    }
  }
  if (!found)
    throw degenerate_projection(
        "fit_monotone_single_index: every direction collapses the design");

  // pattern search refinement (defaults only engage beyond the plane)
  std::size_t steps = refine_steps ? refine_steps : (d >= 3 ? 50 : 0);
  double delta = 0.25;
  for (std::size_t s = 0; s < steps; ++s) {
    bool improved = false;
    std::vector<double> trial_beta;
    profile_eval trial_best;
    for (std::size_t j = 0; j < d; ++j) {
      for (double sign : {1.0, -1.0}) {
        std::vector<double> cand = best.beta_hat;
        cand[j] += sign * delta;
        if (!normalize(cand)) continue;
        profile_eval pe = profile_direction(X, y, cand);
        if (pe.degenerate) continue;
        if (pe.sse < best_sse && (!improved || pe.sse < trial_best.sse)) {
          improved = true;
          trial_best = std::move(pe);
          trial_beta = std::move(cand);
        }
      }
    }
    if (improved) {
      best_sse = trial_best.sse;
      best.beta_hat = std::move(trial_beta);
      best.psi_hat = std::move(trial_best.psi);
    } else {
      delta *= 0.5;
    }
  }
  best.sse = best_sse;

  // sign convention: flip only when the fit survives the flip, which needs
  // a constant psi; otherwise the sign carries real information
  std::size_t lead = 0;
  while (lead < d && best.beta_hat[lead] == 0.0) ++lead;
  if (lead < d && best.beta_hat[lead] < 0.0) {
    double vmin = *std::min_element(best.psi_hat.values.begin(),
                                    best.psi_hat.values.end());
    double vmax = *std::max_element(best.psi_hat.values.begin(),
                                    best.psi_hat.values.end());
    if (vmin == vmax) {
      std::vector<double> flipped(d);
      for (std::size_t j = 0; j < d; ++j) flipped[j] = -best.beta_hat[j];
      profile_eval pe = profile_direction(X, y, flipped);
      if (!pe.degenerate && pe.sse <= best_sse) {
        best.beta_hat = std::move(flipped);
        best.psi_hat = std::move(pe.psi);
        best.sse = pe.sse;
      }
    }
  }
  return best;
}

}  // namespace shapereg
