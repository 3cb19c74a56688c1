#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "shapereg/shapes.hpp"

namespace shapereg {

enum class shape_family { isotonic, convex, matrix, unimodal };
enum class error_law { gaussian, rademacher, t5 };
enum class truth_kind {
  constant,     // all zero
  ramp,         // linear rise of total height v
  blocks,       // k level steps of total height v
  hybrid,       // k steps on the first half, strict rise on the second
  quadratic,    // convex parabola with range v
  matrix_ramp,  // additive two-way ramp with range v
  valley        // tent dip with range v
};
enum class estimator_kind { lse, oracle };

struct scenario {
  std::string id;
  shape_family family = shape_family::isotonic;
  truth_kind truth = truth_kind::ramp;
  std::size_t n = 100;        // total size; matrix scenarios use n1 * n2
  std::size_t n1 = 0, n2 = 0; // matrix shape
  std::size_t k = 1;          // blocks in piecewise-constant truths
  double v = 1.0;             // total variation scale
  double sigma = 1.0;
  error_law law = error_law::gaussian;
};

// the signal vector (row-major for matrix scenarios)
std::vector<double> theta_star(const scenario& sc);

// block lengths when the truth is piecewise constant; family_mismatch
// otherwise (used by the oracle estimator)
std::vector<std::size_t> scenario_blocks(const scenario& sc);

// one draw of noise added onto theta, variance sigma^2 under every law
void add_noise(std::vector<double>& y, const std::vector<double>& theta,
               error_law law, double sigma, class rng& g);

struct risk_estimate {
  double risk = 0.0;
  double se = 0.0;
  std::size_t reps = 0;
  double p = 2.0;
  std::uint64_t seed = 0;
};

// Monte Carlo estimate of n^{-1} E sum |theta_hat - theta*|^p for the
// family's least squares estimator or the blockwise-mean oracle.
risk_estimate mc_risk(const scenario& sc, estimator_kind est, double p,
                      std::size_t reps, std::uint64_t seed);

// blockwise means; lengths must tile the vector exactly (bad_partition)
std::vector<double> oracle_fit(const std::vector<double>& y,
                               const std::vector<std::size_t>& lengths);

// E|N(0,1)|^p
double gaussian_abs_moment(double p);

// exact risk of the blockwise oracle under gaussian noise:
// E n^{-1} sum |oracle - theta*|^p = E|eta|^p sigma^p n^{-1} sum n_i^{(2-p)/2}
double lp_oracle_risk(const std::vector<std::size_t>& lengths, double sigma,
                      double p, std::size_t n);

// Structural worst-case risk bound evaluated with unit constants: the rate
// carrier for each family (variation and sample size only). Useful for
// slope comparisons, not as a certified numeric bound.
double worst_case_bound_rhs(const scenario& sc);

// Oracle-inequality right-hand side: minimum over a candidate ladder of
// piecewise simplifications of the truth of approximation error plus a
// complexity term. sharp == true uses the tighter gaussian constant for the
// monotone family. 1-D families only.
double adaptive_bound_rhs(const std::vector<double>& theta, double sigma,
                          shape_family family, bool sharp);

// two-way analogue over rectangular block coarsenings
double adaptive_bound_rhs_matrix(const matrix_data& theta, double sigma);

// Variation-partition bound for p-th power risks of the monotone LSE:
// minimum over partitions of (within-block span)^p + sigma^p (k/n)^{m/2},
// m = min(p, 2). pre: theta nondecreasing, p >= 1, p != 2.
double pro_bound_rhs(const std::vector<double>& theta, double sigma, double p);

enum class cone_tag { full_space, orthant, monotone };

// Monte Carlo E ||Pi_cone(Z)||^2 for standard normal Z; the statistical
// dimension of the cone. Closed forms: n, n/2, and the harmonic number.
risk_estimate statistical_dimension(cone_tag tag, std::size_t n,
                                    std::size_t reps, std::uint64_t seed);

double harmonic(std::size_t n);

// block lengths of the exact level sets; not_isotonic when decreasing
std::vector<std::size_t> tangent_cone_isotonic(const std::vector<double>& theta);

// projection onto the product of monotone cones given by block lengths
std::vector<double> project_tangent_blocks(const std::vector<std::size_t>& lengths,
                                           const std::vector<double>& z);

// OLS slope of log risk against log n. pre: at least four points spanning
// a factor of 10^{1.5} in n, positive entries throughout.
double rate_slope(const std::vector<std::pair<double, double>>& n_risk);

}  // namespace shapereg
