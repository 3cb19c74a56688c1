#include "shapereg/isotonic.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>

#include "shapereg/errors.hpp"
#include "shapereg/kahan.hpp"

namespace shapereg {

namespace {

struct pool_block {
  std::size_t lo;
  double sum;     // sum of w_i * y_i over the block
  double weight;  // sum of w_i
};

// mean(a) >= mean(b) without dividing; weights are positive
bool mean_geq(const pool_block& a, const pool_block& b) {
  return a.sum * b.weight >= b.sum * a.weight;
}

// Core nondecreasing PAVA on (y, w). Returns the block stack; values are
// not divided out here.
std::vector<pool_block> pool(const std::vector<double>& y,
                             const std::vector<double>& w) {
  std::vector<pool_block> stack;
  stack.reserve(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    double wi = w.empty() ? 1.0 : w[i];
    stack.push_back({i, wi * y[i], wi});
    // merging on >= collapses exact ties, so block means end up strictly
    // increasing: the canonical representation
    while (stack.size() >= 2 && mean_geq(stack[stack.size() - 2], stack.back())) {
      pool_block top = stack.back();
      stack.pop_back();
      stack.back().sum += top.sum;
      stack.back().weight += top.weight;
    }
  }
  return stack;
}

void finalize_blocks(const std::vector<pool_block>& stack, std::size_t n,
                     double sign, step_fit& out) {
  out.values.resize(n);
  out.blocks.clear();
  out.blocks.reserve(stack.size());
  for (std::size_t b = 0; b < stack.size(); ++b) {
    std::size_t lo = stack[b].lo;
    std::size_t hi = (b + 1 < stack.size() ? stack[b + 1].lo : n) - 1;
    double sum = sign * stack[b].sum;  // sign folds the nonincreasing case back
    double value = sum / stack[b].weight;
    out.blocks.push_back({lo, hi, sum, stack[b].weight, value});
    for (std::size_t i = lo; i <= hi; ++i) out.values[i] = value;
  }
}

double weighted_sse(const std::vector<double>& y, const std::vector<double>& w,
                    const std::vector<double>& fit) {
  kahan_sum acc;
  for (std::size_t i = 0; i < y.size(); ++i) {
    double r = y[i] - fit[i];
    acc.add((w.empty() ? 1.0 : w[i]) * r * r);
  }
  return acc.value();
}

}  // namespace

step_fit pava(const std::vector<double>& y, const std::vector<double>& w,
              monotone_direction dir) {
  if (y.empty()) throw empty_input("pava: empty input");
  if (!w.empty()) {
    if (w.size() != y.size()) throw dim_mismatch("pava: weight length mismatch");
    for (double wi : w)
      if (!(wi > 0.0)) throw invalid_input("pava: weights must be positive");
  }
  step_fit out;
  if (dir == monotone_direction::nondecreasing) {
    finalize_blocks(pool(y, w), y.size(), 1.0, out);
  } else {
    std::vector<double> neg(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) neg[i] = -y[i];
    finalize_blocks(pool(neg, w), y.size(), -1.0, out);
  }
  out.sse = weighted_sse(y, w, out.values);
  return out;
}

double minmax_value(const std::vector<double>& y, std::size_t j) {
  if (y.empty()) throw empty_input("minmax_value: empty input");
  if (j >= y.size()) throw index_out_of_range("minmax_value: index out of range");
  const std::size_t n = y.size();
  std::vector<double> prefix(n + 1, 0.0);
  kahan_sum acc;
  for (std::size_t i = 0; i < n; ++i) {
    acc.add(y[i]);
    prefix[i + 1] = acc.value();
  }
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t v = j; v < n; ++v) {
    double inner = -std::numeric_limits<double>::infinity();
    for (std::size_t u = 0; u <= j; ++u) {
      double mean = (prefix[v + 1] - prefix[u]) / static_cast<double>(v - u + 1);
      inner = std::max(inner, mean);
    }
    best = std::min(best, inner);
  }
  return best;
}

double eval_pl(const piecewise_linear& f, double t) {
  if (f.knots.empty()) throw empty_input("eval_pl: no knots");
  if (!(t >= f.knots.front() && t <= f.knots.back()))
    throw out_of_domain("eval_pl: point outside the domain");
  auto it = std::lower_bound(f.knots.begin(), f.knots.end(), t);
  std::size_t hi = static_cast<std::size_t>(it - f.knots.begin());
  if (f.knots[hi] == t) return f.values[hi];
  std::size_t lo = hi - 1;
  double lam = (t - f.knots[lo]) / (f.knots[hi] - f.knots[lo]);
  return f.values[lo] + lam * (f.values[hi] - f.values[lo]);
}

piecewise_linear csd(const series& s) {
  validate(s);
  const std::size_t n = s.size();
  bool unit = true;
  for (double xi : s.x)
    if (!(xi > 0.0 && xi <= 1.0)) { unit = false; break; }

  piecewise_linear f;
  f.knots.resize(n + 1);
  f.values.resize(n + 1);
  f.knots[0] = 0.0;
  f.values[0] = 0.0;
  kahan_sum acc;
  for (std::size_t i = 0; i < n; ++i) {
    double t;
    if (unit) {
      t = s.x[i];
    } else if (n == 1) {
      t = 1.0;
    } else {
      t = 1.0 / n + (s.x[i] - s.x.front()) / (s.x.back() - s.x.front()) *
                        (1.0 - 1.0 / n);
    }
    acc.add(s.y[i]);
    f.knots[i + 1] = t;
    f.values[i + 1] = acc.value() / static_cast<double>(n);
  }
  return f;
}

namespace {

// (b - a) x (c - a) in the plane; negative when c is below the line a-b
double cross(double ax, double ay, double bx, double by, double cx, double cy) {
  return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax);
}

}  // namespace

piecewise_linear gcm(const piecewise_linear& f) {
  if (f.knots.empty()) throw empty_input("gcm: no knots");
  if (f.knots.size() != f.values.size())
    throw dim_mismatch("gcm: knot and value lengths differ");
  std::vector<std::size_t> hull;
  for (std::size_t i = 0; i < f.knots.size(); ++i) {
    // pop while the new point makes the last hull edge non convex; <= also
    // drops collinear interior knots, so the output is minimal
    while (hull.size() >= 2) {
      std::size_t a = hull[hull.size() - 2], b = hull.back();
      if (cross(f.knots[a], f.values[a], f.knots[b], f.values[b], f.knots[i],
                f.values[i]) <= 0.0)
        hull.pop_back();
      else
        break;
    }
    hull.push_back(i);
  }
  piecewise_linear out;
  out.knots.reserve(hull.size());
  out.values.reserve(hull.size());
  for (std::size_t i : hull) {
    out.knots.push_back(f.knots[i]);
    out.values.push_back(f.values[i]);
  }
  return out;
}

step_fit slope_fit(const series& s) {
  validate(s);
  const std::size_t n = s.size();
  // cumulative sums over integer indices; the hull geometry is invariant
  // under the affine change to diagram coordinates, and integer abscissae
  // keep the slope divisions identical to pava's block-mean divisions
  std::vector<double> cum(n + 1, 0.0);
  kahan_sum acc;
  for (std::size_t i = 0; i < n; ++i) {
    acc.add(s.y[i]);
    cum[i + 1] = acc.value();
  }
  std::vector<std::size_t> hull;
  for (std::size_t i = 0; i <= n; ++i) {
    while (hull.size() >= 2) {
      std::size_t a = hull[hull.size() - 2], b = hull.back();
      if (cross(static_cast<double>(a), cum[a], static_cast<double>(b), cum[b],
                static_cast<double>(i), cum[i]) <= 0.0)
        hull.pop_back();
      else
        break;
    }
    hull.push_back(i);
  }

  step_fit out;
  out.xs = s.x;
  out.values.resize(n);
  out.blocks.reserve(hull.size() - 1);
  for (std::size_t t = 0; t + 1 < hull.size(); ++t) {
    std::size_t a = hull[t], b = hull[t + 1];
    double sum = cum[b] - cum[a];
    double weight = static_cast<double>(b - a);
    double slope = sum / weight;
    out.blocks.push_back({a, b - 1, sum, weight, slope});
    for (std::size_t i = a; i < b; ++i) out.values[i] = slope;
  }
  kahan_sum sse;
  for (std::size_t i = 0; i < n; ++i) {
    double r = s.y[i] - out.values[i];
    sse.add(r * r);
  }
  out.sse = sse.value();
  return out;
}

step_fit constrained_pava(const std::vector<double>& y, std::size_t l,
                          double phi0) {
  if (y.empty()) throw empty_input("constrained_pava: empty input");
  const std::size_t n = y.size();
  if (l < 1 || l >= n)
    throw index_out_of_range("constrained_pava: split must satisfy 1 <= l < n");

  std::vector<double> left(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(l));
  std::vector<double> right(y.begin() + static_cast<std::ptrdiff_t>(l), y.end());
  step_fit fl = pava(left);
  step_fit fr = pava(right);

  step_fit out;
  out.values.resize(n);
  for (std::size_t i = 0; i < l; ++i)
    out.values[i] = std::min(fl.values[i], phi0);
  for (std::size_t i = l; i < n; ++i)
    out.values[i] = std::max(fr.values[i - l], phi0);

  // clipping merges blocks, so recompute the block structure from the values
  std::size_t lo = 0;
  for (std::size_t i = 1; i <= n; ++i) {
    if (i == n || out.values[i] != out.values[i - 1]) {
      step_block b;
      b.lo = lo;
      b.hi = i - 1;
      kahan_sum bs;
      for (std::size_t j = lo; j < i; ++j) bs.add(y[j]);
      b.sum = bs.value();
      b.weight = static_cast<double>(i - lo);
      b.value = out.values[lo];
      out.blocks.push_back(b);
      lo = i;
    }
  }
  out.sse = weighted_sse(y, {}, out.values);

#ifndef NDEBUG
  // optimality spot checks: each block's residual total must not expose a
  // feasible descent direction
  {
    double scale = 1.0;
    for (double v : y) scale = std::max(scale, std::abs(v));
    const double slack = 1e-8 * scale;
    for (const auto& b : out.blocks) {
      double resid = b.sum - b.value * b.weight;
      bool pinned = b.value == phi0;
      bool left_side = b.hi < l;
      if (!pinned) {
        assert(std::abs(resid) <= slack);  // interior block sits at its mean
      } else if (left_side || b.lo >= l) {
        // a pinned block can only move away from phi0 on its own side
        if (left_side)
          assert(resid >= -slack);
        else
          assert(resid <= slack);
      }
    }
  }
#endif
  return out;
}

double eval_step(const step_fit& fit, double t) {
  if (fit.values.empty()) throw empty_input("eval_step: empty fit");
  if (!std::isfinite(t)) throw out_of_domain("eval_step: non-finite point");
  const std::size_t n = fit.values.size();
  if (fit.xs.empty()) {
    // canonical grid (i+1)/n on (0, 1]; search against the same divisions
    // step_x produces so the two never disagree at grid points
    if (!(t > 0.0 && t <= 1.0)) throw out_of_domain("eval_step: point outside (0, 1]");
    std::size_t lo = 0, hi = n - 1;
    while (lo < hi) {
      std::size_t mid = (lo + hi) / 2;
      double xm = static_cast<double>(mid + 1) / static_cast<double>(n);
      if (t <= xm)
        hi = mid;
      else
        lo = mid + 1;
    }
    return fit.values[lo];
  }
  if (fit.xs.size() != n) throw dim_mismatch("eval_step: design length mismatch");
  if (!(t <= fit.xs.back())) throw out_of_domain("eval_step: point above the domain");
  if (fit.xs.front() > 0.0 && !(t > 0.0))
    throw out_of_domain("eval_step: point at or below zero");
  auto it = std::lower_bound(fit.xs.begin(), fit.xs.end(), t);
  std::size_t i = static_cast<std::size_t>(it - fit.xs.begin());
  if (i >= n) i = n - 1;
  return fit.values[i];
}

double step_x(const step_fit& fit, std::size_t i) {
  if (i >= fit.values.size()) throw index_out_of_range("step_x: index out of range");
  if (!fit.xs.empty()) return fit.xs[i];
  return static_cast<double>(i + 1) / static_cast<double>(fit.values.size());
}

}  // namespace shapereg
