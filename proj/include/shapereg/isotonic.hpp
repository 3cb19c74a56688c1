#pragma once

#include <cstddef>
#include <vector>

#include "shapereg/series.hpp"

namespace shapereg {

enum class monotone_direction { nondecreasing, nonincreasing };

// One constant piece of a step fit. sum and weight are the data sums
// (sum = weighted data total over the block), kept so that block means can
// be reconstituted with a single division. For clamped fits (see
// constrained_pava) value need not equal sum / weight.
struct step_block {
  std::size_t lo = 0, hi = 0;  // inclusive
  double sum = 0.0;
  double weight = 0.0;
  double value = 0.0;
};

// Piecewise constant, left continuous fit: value(t) = values[i] for
// t in (x_{i-1}, x_i]. xs empty means the canonical grid x_i = (i+1)/n.
struct step_fit {
  std::vector<double> xs;
  std::vector<double> values;
  std::vector<step_block> blocks;
  double sse = 0.0;  // weighted, against the data the fit was computed from
};

// Weighted least squares fit under a monotonicity constraint; pool adjacent
// violators with blocks kept as (sum, weight) pairs and a single division
// per block at the end. Adjacent blocks with equal means are merged, so the
// block structure is canonical (means strictly monotone across blocks).
// w empty means unit weights; otherwise w must be positive and match y.
step_fit pava(const std::vector<double>& y, const std::vector<double>& w = {},
              monotone_direction dir = monotone_direction::nondecreasing);

// Fitted value at index j (0-based) through the min-max representation:
// min over v >= j of max over u <= j of mean(y_u..y_v). Quadratic time;
// intended as an independent cross-check, not for production fitting.
double minmax_value(const std::vector<double>& y, std::size_t j);

// Continuous piecewise linear function on [knots.front(), knots.back()].
struct piecewise_linear {
  std::vector<double> knots;   // strictly increasing
  std::vector<double> values;  // same length
};

double eval_pl(const piecewise_linear& f, double t);

// Cumulative sum diagram of a sample: starts at (0, 0) and increases by
// y_i / n at each design point. Designs already inside (0, 1] keep their
// points; anything else is mapped affinely onto [1/n, 1], which sends an
// equispaced design to the canonical grid i/n.
piecewise_linear csd(const series& s);

// Greatest convex minorant: the lower convex hull of the graph of f.
// Output knots are a subset of the input knots (endpoints always kept),
// and eval_pl(gcm(f), t) <= eval_pl(f, t) on the whole domain.
piecewise_linear gcm(const piecewise_linear& f);

// Isotonic fit through the geometry of the cumulative sum diagram: fitted
// values are the left derivatives of the greatest convex minorant of the
// cumulative sums taken over integer indices. Agrees with pava exactly
// (same block sums, same single division per block).
step_fit slope_fit(const series& s);

// Nondecreasing fit with the pin theta_l <= phi0 <= theta_{l+1} (l counts
// points in the left segment, 1 <= l < n): fit each side by pava, then clip
// the left fit at phi0 from above and the right fit from below.
step_fit constrained_pava(const std::vector<double>& y, std::size_t l,
                          double phi0);

// Evaluate a step fit, left continuously. Throws out_of_domain above the
// last design point, at or below zero when the design is positive, and on
// non-finite t. Values below the first design point extend constantly.
double eval_step(const step_fit& fit, double t);

// design point for index i when fit.xs is empty (canonical grid)
double step_x(const step_fit& fit, std::size_t i);

}  // namespace shapereg
