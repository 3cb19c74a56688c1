#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "shapereg/isotonic.hpp"
#include "shapereg/partial_order.hpp"

namespace shapereg {

enum class shape1d { nondecreasing, nonincreasing, convex };

// One additive component: fitted values at the distinct design values of its
// coordinate, centered to weighted mean zero over the design.
struct component_fit {
  shape1d shape = shape1d::nondecreasing;
  std::vector<double> xs;      // distinct values, ascending
  std::vector<double> values;  // fitted value at each xs entry
  std::vector<double> weights; // multiplicity of each xs entry in the design
};

// value of the component at a design coordinate (exact match required)
double component_at(const component_fit& f, double x);

struct additive_fit {
  double mu_hat = 0.0;
  std::vector<component_fit> components;
  double sse = 0.0;
  std::size_t cycles = 0;
  bool converged = true;
};

// Cyclic backfitting for an additive model with one shape constraint per
// coordinate: each pass refits one component on the pooled partial
// residuals, recenters it, and moves on. The intercept stays at the sample
// mean. Stops when the SSE improvement of a full cycle drops below tol;
// hitting max_cycles leaves converged == false (best iterate returned).
additive_fit backfit_additive(const std::vector<point>& X,
                              const std::vector<double>& y,
                              const std::vector<shape1d>& shapes,
                              double tol = 1e-10,
                              std::size_t max_cycles = 500);

// Component k fit with every other component fixed at its true function:
// the single-coordinate shape fit of y - mu_star - sum_{j != k} others[j],
// centered. others[k] is ignored.
component_fit oracle_component(
    const std::vector<point>& X, const std::vector<double>& y, std::size_t k,
    const std::vector<std::function<double(double)>>& others, double mu_star,
    shape1d shape);

// ---- monotone single index ----

struct single_index_fit {
  std::vector<double> beta_hat;  // unit norm
  step_fit psi_hat;              // nondecreasing over the projected design
  double sse = 0.0;
};

// Profile least squares over unit directions: for each candidate beta the
// responses are ordered by x . beta (exact ties pooled) and fitted by pava;
// the direction grid is a uniform angle sweep for d == 2 and a Halton
// sphere sample plus pattern-search refinement for d >= 3. Ties in SSE keep
// the earliest candidate. Candidates whose projections are all equal are
// skipped; if every candidate degenerates, degenerate_projection is thrown.
// n_candidates == 0 and refine_steps == 0 pick the documented defaults
// (720 angles / 512 points with 50 refinement passes).
single_index_fit fit_monotone_single_index(const std::vector<point>& X,
                                           const std::vector<double>& y,
                                           std::size_t n_candidates = 0,
                                           std::size_t refine_steps = 0);

// total squared error of the model (beta, psi) on data, evaluating psi by
// left-continuous steps over its design
double single_index_sse(const std::vector<point>& X,
                        const std::vector<double>& y,
                        const std::vector<double>& beta, const step_fit& psi);

}  // namespace shapereg
