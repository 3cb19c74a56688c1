#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "shapereg/isotonic.hpp"
#include "shapereg/series.hpp"

namespace shapereg {

// Antiderivative of the biweight kernel (15/16)(1 - x^2)^2, shifted so the
// value is 0 at -1 and 1 at +1.
double integrated_biweight(double u);

// 0.5 * n^{-1/5}
double default_bandwidth(std::size_t n);

// Kernel-smoothed version of a step fit on (0, 1]: start value plus the sum
// of block jumps passed through the integrated kernel at scale h. Jumps sit
// at the last design point of each block. Outside [h, 1-h] the function is
// extended as a constant. pre: 0 < h < 1/2.
double smooth_isotonic(const step_fit& fit, double h, double t);

enum class bootstrap_scheme { smoothed, naive_lse, pairs };

struct interval {
  double lo = 0.0;
  double hi = 0.0;
  double point = 0.0;          // the isotonic LSE at t
  std::size_t replications = 0;
};

// Bootstrap confidence interval for f(t) under monotonicity, built from the
// n^{1/3}-scaled resampling distribution. Schemes: "smoothed" recenters on
// the kernel-smoothed fit and resamples its centered residuals (consistent);
// "naive_lse" does the same around the raw LSE (known to undercover, kept
// for comparison); "pairs" resamples observation rows. Deterministic in
// (data, seed). pre: b >= 100, 0 < alpha < 1; smoothed scheme also needs
// 0 < h < 1/2 and t inside [h, 1-h].
interval bootstrap_ci(const series& s, double t, double alpha, std::size_t b,
                      bootstrap_scheme scheme, double h, std::uint64_t seed);

// Squared-distance gap between the best monotone fit pinned to pass through
// level phi0 at t and the unconstrained monotone fit; nonnegative, zero
// exactly when the unconstrained fit already brackets phi0 at t.
double lrs_statistic(const series& s, double t, double phi0);

// residual mean square of an isotonic fit computed on s
double estimate_sigma2(const series& s, const step_fit& fit);

// same, fitting internally
double estimate_sigma2(const series& s);

// Sorted Monte Carlo samples of a reference distribution plus the
// parameters they were generated under (stored in the table file).
struct null_table {
  std::vector<double> samples;
  std::array<double, 4> params{};  // (grid_step, horizon, n, seed)
};

// order-statistic quantile with linear interpolation, p in [0, 1]
double table_quantile(const null_table& t, double p);

void save_null_table(const std::string& path, const null_table& t);
null_table load_null_table(const std::string& path);

// Location of the minimum of two-sided Brownian motion plus a parabola,
// simulated on a symmetric grid of step grid_step out to +-horizon; ties go
// to the smallest |h|. pre: 0 < grid_step <= 0.01, horizon >= 2, b >= 1000.
null_table simulate_chernoff(std::size_t b, double grid_step, double horizon,
                             std::uint64_t seed);

// Samples of the pinned-fit statistic at the midpoint under a unit-slope,
// unit-noise signal on the canonical grid; the limit is parameter free, so
// this is the reference table for lrs_ci. pre: n >= 200, b >= 1000.
null_table simulate_lrs_null(std::size_t b, std::size_t n, std::uint64_t seed);

// generalization used to exercise pivotality: slope and noise level free
null_table simulate_lrs_general(std::size_t b, std::size_t n, double slope,
                                double sigma, std::uint64_t seed);

// SHAPEREG_CACHE_DIR if set, otherwise <system temp>/shapereg_cache;
// created on first use
std::string cache_dir();

// disk-backed wrappers: load a table with matching parameters or simulate
// and store it
null_table cached_lrs_null(std::size_t b, std::size_t n, std::uint64_t seed);
null_table cached_chernoff(std::size_t b, double grid_step, double horizon,
                           std::uint64_t seed);

// Confidence interval for f(t) by inverting the pinned-fit statistic against
// a reference table: the interval collects levels whose statistic stays
// below sigma2_hat times the table quantile. pre: 0 < alpha < 1.
interval lrs_ci(const series& s, double t, double alpha,
                const null_table& table);

}  // namespace shapereg
