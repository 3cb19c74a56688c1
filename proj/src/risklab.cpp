#include "shapereg/risklab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "shapereg/errors.hpp"
#include "shapereg/isotonic.hpp"
#include "shapereg/kahan.hpp"
#include "shapereg/rng.hpp"

namespace shapereg {

namespace {

std::size_t scenario_size(const scenario& sc) {
  if (sc.family == shape_family::matrix) {
    if (sc.n1 == 0 || sc.n2 == 0)
      throw invalid_input("matrix scenario needs n1 and n2");
    return sc.n1 * sc.n2;
  }
  if (sc.n == 0) throw empty_input("scenario size is zero");
  return sc.n;
}

// lengths of k near-equal blocks tiling n, long blocks first
std::vector<std::size_t> equal_lengths(std::size_t n, std::size_t k) {
  if (k == 0 || k > n) throw invalid_input("block count out of range");
  std::vector<std::size_t> lengths(k, n / k);
  for (std::size_t j = 0; j < n % k; ++j) lengths[j] += 1;
  return lengths;
}

double grid01(std::size_t i, std::size_t n) {
  return n > 1 ? static_cast<double>(i) / static_cast<double>(n - 1) : 0.0;
}

std::vector<double> block_values(std::size_t k, double lo, double hi) {
  std::vector<double> vals(k, lo);
  for (std::size_t j = 0; j < k; ++j)
    vals[j] = k > 1 ? lo + (hi - lo) * static_cast<double>(j) /
                               static_cast<double>(k - 1)
                    : lo;
  return vals;
}

std::vector<double> expand_blocks(const std::vector<std::size_t>& lengths,
                                  const std::vector<double>& vals) {
  std::vector<double> out;
  for (std::size_t j = 0; j < lengths.size(); ++j)
    out.insert(out.end(), lengths[j], vals[j]);
  return out;
}

double pow_abs(double d, double p) {
  if (p == 2.0) return d * d;
  if (p == 1.0) return std::abs(d);
  return std::pow(std::abs(d), p);
}

risk_estimate summarize(const std::vector<double>& samples, double p,
                        std::uint64_t seed) {
  risk_estimate out;
  out.reps = samples.size();
  out.p = p;
  out.seed = seed;
  out.risk = sum(samples) / static_cast<double>(samples.size());
  if (samples.size() > 1) {
    kahan_sum sq;
    for (double s : samples) sq.add((s - out.risk) * (s - out.risk));
    double var = sq.value() / static_cast<double>(samples.size() - 1);
    out.se = std::sqrt(std::max(var, 0.0) / static_cast<double>(samples.size()));
  }
  return out;
}

// blockwise means of theta over near-equal index blocks, expanded back
std::vector<double> coarsen(const std::vector<double>& theta, std::size_t q) {
  auto lengths = equal_lengths(theta.size(), q);
  std::vector<double> out(theta.size());
  std::size_t at = 0;
  for (std::size_t len : lengths) {
    kahan_sum s;
    for (std::size_t i = at; i < at + len; ++i) s.add(theta[i]);
    double mean = s.value() / static_cast<double>(len);
    std::fill(out.begin() + static_cast<std::ptrdiff_t>(at),
              out.begin() + static_cast<std::ptrdiff_t>(at + len), mean);
    at += len;
  }
  return out;
}

std::size_t count_levels(const std::vector<double>& v) {
  std::size_t k = 1;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] != v[i - 1]) ++k;
  return k;
}

double mean_sq_gap(const std::vector<double>& a, const std::vector<double>& b) {
  kahan_sum s;
  for (std::size_t i = 0; i < a.size(); ++i)
    s.add((a[i] - b[i]) * (a[i] - b[i]));
  return s.value() / static_cast<double>(a.size());
}

}  // namespace

std::vector<double> theta_star(const scenario& sc) {
  const std::size_t n = scenario_size(sc);
  switch (sc.truth) {
    case truth_kind::constant:
      return std::vector<double>(n, 0.0);
    case truth_kind::ramp: {
      std::vector<double> th(n);
      for (std::size_t i = 0; i < n; ++i) th[i] = sc.v * grid01(i, n);
      return th;
    }
    case truth_kind::blocks:
      return expand_blocks(equal_lengths(n, sc.k),
                           block_values(sc.k, 0.0, sc.v));
    case truth_kind::hybrid: {
      // level steps spend half the variation, the strict rise the rest
      std::size_t half = n / 2;
      std::size_t rest = n - half;
      std::vector<double> th;
      if (half > 0)
        th = expand_blocks(equal_lengths(half, std::min(sc.k, half)),
                           block_values(std::min(sc.k, half), 0.0, sc.v / 2));
      th.reserve(n);
      for (std::size_t t = 0; t < rest; ++t)
        th.push_back(sc.v / 2 + (sc.v / 2) * static_cast<double>(t + 1) /
                                    static_cast<double>(rest));
      return th;
    }
    case truth_kind::quadratic: {
      std::vector<double> th(n);
      for (std::size_t i = 0; i < n; ++i) {
        double u = 2.0 * grid01(i, n) - 1.0;
        th[i] = sc.v * u * u;
      }
      return th;
    }
    case truth_kind::matrix_ramp: {
      std::vector<double> th(n);
      for (std::size_t i = 0; i < sc.n1; ++i)
        for (std::size_t j = 0; j < sc.n2; ++j)
          th[i * sc.n2 + j] =
              sc.v * (grid01(i, sc.n1) + grid01(j, sc.n2)) / 2.0;
      return th;
    }
    case truth_kind::valley: {
      std::vector<double> th(n);
      for (std::size_t i = 0; i < n; ++i)
        th[i] = sc.v * std::abs(2.0 * grid01(i, n) - 1.0);
      return th;
    }
  }
  throw invalid_input("unknown truth kind");
}

std::vector<std::size_t> scenario_blocks(const scenario& sc) {
  const std::size_t n = scenario_size(sc);
  switch (sc.truth) {
    case truth_kind::constant:
      return {n};
    case truth_kind::blocks:
      return equal_lengths(n, sc.k);
    default:
      throw family_mismatch(
          "oracle needs a piecewise-constant truth");
  }
}

void add_noise(std::vector<double>& y, const std::vector<double>& theta,
               error_law law, double sigma, rng& g) {
  y.resize(theta.size());
  switch (law) {
    case error_law::gaussian:
      for (std::size_t i = 0; i < theta.size(); ++i)
        y[i] = theta[i] + sigma * g.normal();
      break;
    case error_law::rademacher:
      for (std::size_t i = 0; i < theta.size(); ++i)
        y[i] = theta[i] + (g.uniform01() < 0.5 ? -sigma : sigma);
      break;
    case error_law::t5: {
      // t with 5 df scaled to unit variance: var(t_5) = 5/3
      const double scale = sigma * std::sqrt(3.0 / 5.0);
      for (std::size_t i = 0; i < theta.size(); ++i) {
        double z = g.normal();
        double chi = 0.0;
        for (int j = 0; j < 5; ++j) {
          double w = g.normal();
          chi += w * w;
        }
        y[i] = theta[i] + scale * z / std::sqrt(chi / 5.0);
      }
      break;
    }
  }
}

std::vector<double> oracle_fit(const std::vector<double>& y,
                               const std::vector<std::size_t>& lengths) {
  std::size_t total = 0;
  for (std::size_t len : lengths) {
    if (len == 0) throw bad_partition("empty block");
    total += len;
  }
  if (total != y.size())
    throw bad_partition("blocks do not tile the sample");
  std::vector<double> out(y.size());
  std::size_t at = 0;
  for (std::size_t len : lengths) {
    kahan_sum s;
    for (std::size_t i = at; i < at + len; ++i) s.add(y[i]);
    double mean = s.value() / static_cast<double>(len);
    std::fill(out.begin() + static_cast<std::ptrdiff_t>(at),
              out.begin() + static_cast<std::ptrdiff_t>(at + len), mean);
    at += len;
  }
  return out;
}

risk_estimate mc_risk(const scenario& sc, estimator_kind est, double p,
                      std::size_t reps, std::uint64_t seed) {
  if (reps == 0) throw invalid_input("reps must be positive");
  if (!(p > 0.0)) throw invalid_input("p must be positive");
  const std::vector<double> truth = theta_star(sc);
  const std::size_t n = truth.size();

  std::vector<std::size_t> lengths;
  if (est == estimator_kind::oracle) lengths = scenario_blocks(sc);

  std::vector<double> design;
  if (est == estimator_kind::lse && sc.family == shape_family::convex) {
    design.resize(n);
    for (std::size_t i = 0; i < n; ++i) design[i] = static_cast<double>(i);
  }
  // Monte Carlo fits need projection error well below the noise scale,
  // not solver-grade tolerances; keeps large matrix scenarios tractable.
  const double matrix_tol = 1e-7;

  rng master(seed);
  std::vector<double> samples(reps);
  std::vector<double> y;
  for (std::size_t r = 0; r < reps; ++r) {
    rng g = master.child(r);
    add_noise(y, truth, sc.law, sc.sigma, g);
    std::vector<double> fitted;
    if (est == estimator_kind::oracle) {
      fitted = oracle_fit(y, lengths);
    } else {
      switch (sc.family) {
        case shape_family::isotonic:
          fitted = pava(y).values;
          break;
        case shape_family::convex:
          fitted = fit_convex_weighted(design, y).theta_hat;
          break;
        case shape_family::matrix: {
          matrix_data m{sc.n1, sc.n2, y};
          fitted = fit_matrix_isotonic(m, matrix_tol).theta_hat;
          break;
        }
        case shape_family::unimodal:
          fitted = fit_unimodal(y).values;
          break;
      }
    }
    kahan_sum loss;
    for (std::size_t i = 0; i < n; ++i)
      loss.add(pow_abs(fitted[i] - truth[i], p));
    samples[r] = loss.value() / static_cast<double>(n);
  }
  return summarize(samples, p, seed);
}

double gaussian_abs_moment(double p) {
  if (!(p > 0.0)) throw invalid_input("p must be positive");
  return std::pow(2.0, p / 2.0) * std::tgamma((p + 1.0) / 2.0) /
         std::sqrt(std::numbers::pi);
}

double lp_oracle_risk(const std::vector<std::size_t>& lengths, double sigma,
                      double p, std::size_t n) {
  std::size_t total = 0;
  kahan_sum s;
  for (std::size_t len : lengths) {
    if (len == 0) throw bad_partition("empty block");
    total += len;
    s.add(std::pow(static_cast<double>(len), (2.0 - p) / 2.0));
  }
  if (total != n) throw bad_partition("blocks do not tile the sample");
  return gaussian_abs_moment(p) * std::pow(sigma, p) * s.value() /
         static_cast<double>(n);
}

double worst_case_bound_rhs(const scenario& sc) {
  const std::vector<double> truth = theta_star(sc);
  const double n = static_cast<double>(truth.size());
  const double s2 = sc.sigma * sc.sigma;
  switch (sc.family) {
    case shape_family::isotonic: {
      double v = truth.back() - truth.front();
      return std::pow(s2 * v / n, 2.0 / 3.0) +
             s2 * std::log(std::numbers::e * n) / n;
    }
    case shape_family::convex: {
      // variation left after removing the best affine trend
      const std::size_t m = truth.size();
      kahan_sum sy, sxy;
      for (std::size_t i = 0; i < m; ++i) {
        sy.add(truth[i]);
        sxy.add((static_cast<double>(i) - (n - 1) / 2.0) * truth[i]);
      }
      double xbar = (n - 1) / 2.0;
      double sxx = n * (n * n - 1.0) / 12.0;  // sum (i - xbar)^2
      double b = m > 1 ? sxy.value() / sxx : 0.0;
      double a = sy.value() / n - b * xbar;
      double lo = 0.0, hi = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        double r = truth[i] - (a + b * static_cast<double>(i));
        lo = std::min(lo, r);
        hi = std::max(hi, r);
      }
      double t = hi - lo;
      return std::pow(s2 * std::sqrt(t) / n, 4.0 / 5.0) +
             s2 / std::pow(n, 4.0 / 5.0);
    }
    case shape_family::matrix: {
      double v = truth.back() - truth.front();
      double ln = std::log(n);
      return std::sqrt(s2 * v * v / n) * std::pow(ln, 4.0) +
             s2 * std::pow(ln, 8.0) / n;
    }
    case shape_family::unimodal: {
      auto [lo, hi] = std::minmax_element(truth.begin(), truth.end());
      double v = *hi - *lo;
      return std::pow(s2 * v / n, 2.0 / 3.0) + s2 / std::pow(n, 2.0 / 3.0);
    }
  }
  throw invalid_input("unknown family");
}

double adaptive_bound_rhs(const std::vector<double>& theta, double sigma,
                          shape_family family, bool sharp) {
  if (theta.empty()) throw empty_input("empty truth");
  if (family == shape_family::matrix)
    throw family_mismatch("use the matrix variant");
  const std::size_t n = theta.size();
  const double nd = static_cast<double>(n);
  const double s2 = sigma * sigma;

  auto complexity = [&](std::size_t k) {
    double kd = static_cast<double>(k);
    switch (family) {
      case shape_family::isotonic: {
        double c = sharp ? 1.0 : 4.0;
        return c * s2 * kd / nd * std::log(std::numbers::e * nd / kd);
      }
      case shape_family::unimodal: {
        double kk = kd + 1.0;
        return s2 * kk / nd * std::log(std::numbers::e * nd / kk);
      }
      case shape_family::convex:
        return 8.0 * s2 * kd / nd * std::log(std::numbers::e * nd / kd);
      default:
        return 0.0;
    }
  };

  double best = std::numeric_limits<double>::infinity();
  auto consider = [&](const std::vector<double>& cand, std::size_t k) {
    best = std::min(best, mean_sq_gap(theta, cand) + complexity(k));
  };

  if (family == shape_family::convex) {
    // the truth itself, with affine pieces merged
    std::size_t q = 1;
    for (std::size_t i = 2; i < n; ++i) {
      double d0 = theta[i - 1] - theta[i - 2];
      double d1 = theta[i] - theta[i - 1];
      if (std::abs(d1 - d0) >
          1e-12 * (1.0 + std::abs(d0) + std::abs(d1)))
        ++q;
    }
    consider(theta, std::max<std::size_t>(q, 1));
    // piecewise-linear interpolants at equally spaced knots
    for (std::size_t pieces = 1; n > 1; pieces *= 2) {
      std::size_t qq = std::min(pieces, n - 1);
      auto lengths = equal_lengths(n - 1, qq);
      std::vector<double> cand(n);
      std::size_t at = 0;
      cand[0] = theta[0];
      for (std::size_t len : lengths) {
        std::size_t a = at, b = at + len;
        for (std::size_t i = a + 1; i <= b; ++i) {
          double t = static_cast<double>(i - a) / static_cast<double>(len);
          cand[i] = theta[a] + t * (theta[b] - theta[a]);
        }
        at = b;
      }
      consider(cand, qq);
      if (qq == n - 1) break;
    }
    return best;
  }

  // level-set candidates: the truth and its equal-index coarsenings
  consider(theta, count_levels(theta));
  for (std::size_t q = 1;; q *= 2) {
    std::size_t qq = std::min(q, n);
    std::vector<double> cand = coarsen(theta, qq);
    if (family == shape_family::unimodal) cand = fit_unimodal(cand).values;
    consider(cand, count_levels(cand));
    if (qq == n) break;
  }
  return best;
}

double adaptive_bound_rhs_matrix(const matrix_data& theta, double sigma) {
  if (theta.a.empty()) throw empty_input("empty truth");
  const std::size_t n1 = theta.n1, n2 = theta.n2;
  const double nd = static_cast<double>(n1 * n2);
  const double s2 = sigma * sigma;
  const double l8 = std::pow(std::log(std::numbers::e * nd), 8.0);

  double best = std::numeric_limits<double>::infinity();
  for (std::size_t q1 = 1; q1 <= n1; q1 *= 2) {
    for (std::size_t q2 = 1; q2 <= n2; q2 *= 2) {
      auto rows = equal_lengths(n1, q1);
      auto cols = equal_lengths(n2, q2);
      std::vector<double> cand(n1 * n2);
      std::size_t r0 = 0;
      for (std::size_t bi = 0; bi < rows.size(); ++bi) {
        std::size_t c0 = 0;
        for (std::size_t bj = 0; bj < cols.size(); ++bj) {
          kahan_sum s;
          for (std::size_t i = r0; i < r0 + rows[bi]; ++i)
            for (std::size_t j = c0; j < c0 + cols[bj]; ++j)
              s.add(theta.at(i, j));
          double mean =
              s.value() / static_cast<double>(rows[bi] * cols[bj]);
          for (std::size_t i = r0; i < r0 + rows[bi]; ++i)
            for (std::size_t j = c0; j < c0 + cols[bj]; ++j)
              cand[i * n2 + j] = mean;
          c0 += cols[bj];
        }
        r0 += rows[bi];
      }
      double k = static_cast<double>(q1 * q2);
      best = std::min(best, mean_sq_gap(theta.a, cand) + s2 * k * l8 / nd);
      if (q2 == n2) break;
    }
    if (q1 == n1) break;
  }
  return best;
}

double pro_bound_rhs(const std::vector<double>& theta, double sigma,
                     double p) {
  if (!(p >= 1.0) || p == 2.0)
    throw bad_exponent("need p >= 1 and p != 2");
  if (theta.empty()) throw empty_input("empty truth");
  for (std::size_t i = 1; i < theta.size(); ++i)
    if (theta[i] < theta[i - 1])
      throw not_isotonic("truth must be nondecreasing");
  const double nd = static_cast<double>(theta.size());
  const double m = std::min(p, 2.0);

  // value of a partition described by block spans
  auto value = [&](double vpi, std::size_t k) {
    return std::pow(vpi, p) +
           std::pow(sigma, p) * std::pow(static_cast<double>(k) / nd, m / 2.0);
  };

  // exact level sets: zero within-block variation
  double best = value(0.0, count_levels(theta));

  const double v = theta.back() - theta.front();
  if (v > 0.0) {
    double delta = v;
    for (int j = 0; j <= 40; ++j) {
      // greedy: extend each block while its span stays within delta
      std::size_t k = 0, a = 0;
      double vpi = 0.0;
      while (a < theta.size()) {
        std::size_t e = a;
        while (e + 1 < theta.size() && theta[e + 1] - theta[a] <= delta) ++e;
        vpi = std::max(vpi, theta[e] - theta[a]);
        ++k;
        a = e + 1;
      }
      best = std::min(best, value(vpi, k));
      delta /= 2.0;
    }
  }
  return best;
}

risk_estimate statistical_dimension(cone_tag tag, std::size_t n,
                                    std::size_t reps, std::uint64_t seed) {
  if (n == 0) throw empty_input("dimension is zero");
  if (reps == 0) throw invalid_input("reps must be positive");
  rng master(seed);
  std::vector<double> samples(reps);
  std::vector<double> z(n), proj;
  for (std::size_t r = 0; r < reps; ++r) {
    rng g = master.child(r);
    for (std::size_t i = 0; i < n; ++i) z[i] = g.normal();
    kahan_sum s;
    switch (tag) {
      case cone_tag::full_space:
        for (double zi : z) s.add(zi * zi);
        break;
      case cone_tag::orthant:
        for (double zi : z) {
          double pi = std::max(zi, 0.0);
          s.add(pi * pi);
        }
        break;
      case cone_tag::monotone: {
        proj = pava(z).values;
        for (double pi : proj) s.add(pi * pi);
        break;
      }
    }
    samples[r] = s.value();
  }
  return summarize(samples, 2.0, seed);
}

double harmonic(std::size_t n) {
  kahan_sum s;
  for (std::size_t j = 1; j <= n; ++j)
    s.add(1.0 / static_cast<double>(j));
  return s.value();
}

std::vector<std::size_t> tangent_cone_isotonic(
    const std::vector<double>& theta) {
  if (theta.empty()) throw empty_input("empty point");
  std::vector<std::size_t> lengths;
  std::size_t run = 1;
  for (std::size_t i = 1; i < theta.size(); ++i) {
    if (theta[i] < theta[i - 1])
      throw not_isotonic("point is not nondecreasing");
    if (theta[i] == theta[i - 1]) {
      ++run;
    } else {
      lengths.push_back(run);
      run = 1;
    }
  }
  lengths.push_back(run);
  return lengths;
}

std::vector<double> project_tangent_blocks(
    const std::vector<std::size_t>& lengths, const std::vector<double>& z) {
  std::size_t total = 0;
  for (std::size_t len : lengths) {
    if (len == 0) throw bad_partition("empty block");
    total += len;
  }
  if (total != z.size())
    throw bad_partition("blocks do not tile the vector");
  std::vector<double> out;
  out.reserve(z.size());
  std::size_t at = 0;
  for (std::size_t len : lengths) {
    std::vector<double> seg(z.begin() + static_cast<std::ptrdiff_t>(at),
                            z.begin() + static_cast<std::ptrdiff_t>(at + len));
    auto fit = pava(seg);
    out.insert(out.end(), fit.values.begin(), fit.values.end());
    at += len;
  }
  return out;
}

double rate_slope(const std::vector<std::pair<double, double>>& n_risk) {
  if (n_risk.size() < 4)
    throw too_few_points("need at least four sizes");
  double nmin = n_risk.front().first, nmax = n_risk.front().first;
  for (const auto& [n, r] : n_risk) {
    if (!(n > 0.0) || !(r > 0.0))
      throw invalid_input("sizes and risks must be positive");
    nmin = std::min(nmin, n);
    nmax = std::max(nmax, n);
  }
  if (nmax / nmin < std::pow(10.0, 1.5))
    throw too_few_points("sizes span less than 1.5 decades");
  kahan_sum sx, sy;
  for (const auto& [n, r] : n_risk) {
    sx.add(std::log(n));
    sy.add(std::log(r));
  }
  const double xbar = sx.value() / static_cast<double>(n_risk.size());
  const double ybar = sy.value() / static_cast<double>(n_risk.size());
  kahan_sum sxx, sxy;
  for (const auto& [n, r] : n_risk) {
    double dx = std::log(n) - xbar;
    sxx.add(dx * dx);
    sxy.add(dx * (std::log(r) - ybar));
  }
  return sxy.value() / sxx.value();
}

}  // namespace shapereg
