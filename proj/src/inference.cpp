#include "shapereg/inference.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include "shapereg/errors.hpp"
#include "shapereg/kahan.hpp"
#include "shapereg/rng.hpp"

namespace shapereg {

double integrated_biweight(double u) {
  if (u <= -1.0) return 0.0;
  if (u >= 1.0) return 1.0;
  // integral of (15/16)(1 - x^2)^2 from -1 to u
  return 0.5 + (15.0 / 16.0) * (u - 2.0 * u * u * u / 3.0 +
                                u * u * u * u * u / 5.0);
}

double default_bandwidth(std::size_t n) {
  return 0.5 * std::pow(static_cast<double>(n), -0.2);
}

double smooth_isotonic(const step_fit& fit, double h, double t) {
  if (fit.values.empty()) throw empty_input("smooth_isotonic: empty fit");
  if (!(h > 0.0 && h < 0.5))
    throw bad_bandwidth("smooth_isotonic: bandwidth outside (0, 1/2)");
  double tc = std::min(std::max(t, h), 1.0 - h);
  const std::size_t n = fit.values.size();
  double v = fit.values.front();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    double jump = fit.values[i + 1] - fit.values[i];
    if (jump == 0.0) continue;
    v += jump * integrated_biweight((tc - step_x(fit, i)) / h);
  }
  return v;
}

namespace {

// right-constant extension of eval_step; bootstrap refits can have a
// resampled design that ends before t
double eval_step_extended(const step_fit& fit, double t) {
  double last = fit.xs.empty() ? 1.0 : fit.xs.back();
  if (t > last) return fit.values.back();
  return eval_step(fit, t);
}

double quantile_sorted(const std::vector<double>& v, double p) {
  if (v.empty()) throw empty_input("quantile: no samples");
  if (v.size() == 1) return v[0];
  double pos = p * static_cast<double>(v.size() - 1);
  double fl = std::floor(pos);
  std::size_t lo = static_cast<std::size_t>(fl);
  if (lo + 1 >= v.size()) return v.back();
  double frac = pos - fl;
  return v[lo] + frac * (v[lo + 1] - v[lo]);
}

// index count of design points at or below t; the pin position
std::size_t left_count(const series& s, double t) {
  std::size_t l = 0;
  while (l < s.x.size() && s.x[l] <= t) ++l;
  return l;
}

}  // namespace

interval bootstrap_ci(const series& s, double t, double alpha, std::size_t b,
                      bootstrap_scheme scheme, double h, std::uint64_t seed) {
  validate(s);
  if (b < 100) throw too_few_replications("bootstrap_ci: need at least 100 replications");
  if (!(alpha > 0.0 && alpha < 1.0)) throw bad_level("bootstrap_ci: level outside (0, 1)");
  const std::size_t n = s.size();
  const double root = std::cbrt(static_cast<double>(n));

  step_fit base = pava(s.y);
  base.xs = s.x;
  const double point = eval_step_extended(base, t);

  double center_t = point;
  std::vector<double> center_at_x;  // resampling center evaluated on the design
  if (scheme == bootstrap_scheme::smoothed) {
    if (!(h > 0.0 && h < 0.5))
      throw bad_bandwidth("bootstrap_ci: bandwidth outside (0, 1/2)");
    if (!(t >= h && t <= 1.0 - h))
      throw bad_evaluation_point("bootstrap_ci: t outside [h, 1-h]");
    center_at_x.resize(n);
    for (std::size_t i = 0; i < n; ++i)
      center_at_x[i] = smooth_isotonic(base, h, s.x[i]);
    center_t = smooth_isotonic(base, h, t);
  } else if (scheme == bootstrap_scheme::naive_lse) {
    center_at_x = base.values;
  }

  rng gen(seed);
  std::vector<double> deltas;
  deltas.reserve(b);

  if (scheme == bootstrap_scheme::pairs) {
    std::vector<std::size_t> pick(n);
    for (std::size_t rep = 0; rep < b; ++rep) {
      for (std::size_t i = 0; i < n; ++i)
        pick[i] = static_cast<std::size_t>(gen.uniform_below(n));
      std::sort(pick.begin(), pick.end());
      // pool repeated design points by their mean
      std::vector<double> xs, z, w;
      for (std::size_t i : pick) {
        if (xs.empty() || s.x[i] != xs.back()) {
          xs.push_back(s.x[i]);
          z.push_back(0.0);
          w.push_back(0.0);
        }
        z.back() += s.y[i];
        w.back() += 1.0;
      }
      for (std::size_t u = 0; u < z.size(); ++u) z[u] /= w[u];
      step_fit f = pava(z, w);
      f.xs = xs;
      deltas.push_back(root * (eval_step_extended(f, t) - point));
    }
  } else {
    // residual scheme around the chosen center
    std::vector<double> resid(n);
    kahan_sum rs;
    for (std::size_t i = 0; i < n; ++i) {
      resid[i] = s.y[i] - center_at_x[i];
      rs.add(resid[i]);
    }
    double rbar = rs.value() / static_cast<double>(n);
    for (double& r : resid) r -= rbar;

    std::vector<double> ystar(n);
    for (std::size_t rep = 0; rep < b; ++rep) {
      for (std::size_t i = 0; i < n; ++i)
        ystar[i] = center_at_x[i] +
                   resid[static_cast<std::size_t>(gen.uniform_below(n))];
      step_fit f = pava(ystar);
      f.xs = s.x;
      deltas.push_back(root * (eval_step_extended(f, t) - center_t));
    }
  }

  std::sort(deltas.begin(), deltas.end());
  double qlo = quantile_sorted(deltas, alpha / 2.0);
  double qhi = quantile_sorted(deltas, 1.0 - alpha / 2.0);
  interval out;
  out.point = point;
  out.lo = point - qhi / root;
  out.hi = point - qlo / root;
  out.replications = b;
  return out;
}

double lrs_statistic(const series& s, double t, double phi0) {
  validate(s);
  const std::size_t n = s.size();
  std::size_t l = left_count(s, t);
  if (l < 1 || l >= n)
    throw index_out_of_range("lrs_statistic: t does not split the design");
  step_fit free = pava(s.y);
  step_fit pinned = constrained_pava(s.y, l, phi0);
  return std::max(0.0, pinned.sse - free.sse);
}

double estimate_sigma2(const series& s, const step_fit& fit) {
  validate(s);
  if (fit.values.size() != s.size())
    throw dim_mismatch("estimate_sigma2: fit length differs from series");
  return fit.sse / static_cast<double>(s.size());
}

double estimate_sigma2(const series& s) {
  validate(s);
  return estimate_sigma2(s, pava(s.y));
}

double table_quantile(const null_table& t, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw bad_level("table_quantile: p outside [0, 1]");
  return quantile_sorted(t.samples, p);
}

void save_null_table(const std::string& path, const null_table& t) {
  static_assert(std::endian::native == std::endian::little,
                "table files are little endian");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw io_error("save_null_table: cannot open " + path);
  const char magic[4] = {'S', 'R', 'N', 'T'};
  out.write(magic, 4);
  std::uint32_t version = 1;
  out.write(reinterpret_cast<const char*>(&version), sizeof version);
  std::uint64_t b = t.samples.size();
  out.write(reinterpret_cast<const char*>(&b), sizeof b);
  out.write(reinterpret_cast<const char*>(t.params.data()),
            sizeof(double) * t.params.size());
  out.write(reinterpret_cast<const char*>(t.samples.data()),
            static_cast<std::streamsize>(sizeof(double) * t.samples.size()));
  if (!out) throw io_error("save_null_table: write failed on " + path);
}

null_table load_null_table(const std::string& path) {
  static_assert(std::endian::native == std::endian::little,
                "table files are little endian");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("load_null_table: cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "SRNT", 4) != 0)
    throw io_error("load_null_table: bad magic in " + path);
  std::uint32_t version = 0;
  in.read(reinterpret_cast<char*>(&version), sizeof version);
  if (!in || version != 1) throw io_error("load_null_table: unsupported version");
  std::uint64_t b = 0;
  in.read(reinterpret_cast<char*>(&b), sizeof b);
  null_table t;
  in.read(reinterpret_cast<char*>(t.params.data()),
          sizeof(double) * t.params.size());
  if (!in) throw io_error("load_null_table: truncated header");
  t.samples.resize(b);
  in.read(reinterpret_cast<char*>(t.samples.data()),
          static_cast<std::streamsize>(sizeof(double) * b));
  if (!in) throw io_error("load_null_table: truncated samples");
  return t;
}

null_table simulate_chernoff(std::size_t b, double grid_step, double horizon,
                             std::uint64_t seed) {
  if (!(grid_step > 0.0 && grid_step <= 0.01))
    throw bad_grid("simulate_chernoff: grid step outside (0, 0.01]");
  if (!(horizon >= 2.0)) throw bad_grid("simulate_chernoff: horizon below 2");
  if (b < 1000)
    throw too_few_replications("simulate_chernoff: need at least 1000 replications");

  const std::size_t k = static_cast<std::size_t>(std::llround(horizon / grid_step));
  const double sd = std::sqrt(grid_step);
  rng master(seed);
  null_table t;
  t.samples.resize(b);
  for (std::size_t rep = 0; rep < b; ++rep) {
    rng g = master.child(rep);
    double best = 0.0, arg = 0.0;  // W(0) + 0^2
    double wl = 0.0, wr = 0.0;
    for (std::size_t step = 1; step <= k; ++step) {
      double hk = static_cast<double>(step) * grid_step;
      double drift = hk * hk;
      // left wing first: strict improvement keeps the smallest |h|,
      // negative side preferred on exact ties at the same distance
      wl += sd * g.normal();
      if (wl + drift < best) {
        best = wl + drift;
        arg = -hk;
      }
      wr += sd * g.normal();
      if (wr + drift < best) {
        best = wr + drift;
        arg = hk;
      }
    }
    t.samples[rep] = arg;
  }
  std::sort(t.samples.begin(), t.samples.end());
  t.params = {grid_step, horizon, 0.0, static_cast<double>(seed)};
  return t;
}

null_table simulate_lrs_general(std::size_t b, std::size_t n, double slope,
                                double sigma, std::uint64_t seed) {
  if (n < 200) throw invalid_input("simulate_lrs: grid too coarse, need n >= 200");
  if (b < 1000)
    throw too_few_replications("simulate_lrs: need at least 1000 replications");
  rng master(seed);
  null_table t;
  t.samples.resize(b);
  const double phi0 = slope * 0.5;
  for (std::size_t rep = 0; rep < b; ++rep) {
    rng g = master.child(rep);
    series s;
    s.x.resize(n);
    s.y.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      s.x[i] = static_cast<double>(i + 1) / static_cast<double>(n);
      s.y[i] = slope * s.x[i] + sigma * g.normal();
    }
    t.samples[rep] = lrs_statistic(s, 0.5, phi0);
  }
  std::sort(t.samples.begin(), t.samples.end());
  t.params = {0.0, 0.0, static_cast<double>(n), static_cast<double>(seed)};
  return t;
}

null_table simulate_lrs_null(std::size_t b, std::size_t n, std::uint64_t seed) {
  return simulate_lrs_general(b, n, 1.0, 1.0, seed);
}

std::string cache_dir() {
  namespace fs = std::filesystem;
  fs::path dir;
  if (const char* env = std::getenv("SHAPEREG_CACHE_DIR"); env && *env)
    dir = env;
  else
    dir = fs::temp_directory_path() / "shapereg_cache";
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw io_error("cache_dir: cannot create " + dir.string());
  return dir.string();
}

namespace {

null_table cached_or_build(const std::string& name,
                           const std::array<double, 4>& want_params,
                           std::size_t want_b,
                           const std::function<null_table()>& build) {
  namespace fs = std::filesystem;
  fs::path path = fs::path(cache_dir()) / name;
  if (fs::exists(path)) {
    try {
      null_table t = load_null_table(path.string());
      if (t.samples.size() == want_b && t.params == want_params) return t;
    } catch (const io_error&) {
      // stale or corrupt; rebuild below
    }
  }
  null_table t = build();
  save_null_table(path.string(), t);
  return t;
}

}  // namespace

null_table cached_lrs_null(std::size_t b, std::size_t n, std::uint64_t seed) {
  std::ostringstream name;
  name << "lrs_null_b" << b << "_n" << n << "_s" << seed << ".srnt";
  return cached_or_build(
      name.str(), {0.0, 0.0, static_cast<double>(n), static_cast<double>(seed)},
      b, [&] { return simulate_lrs_null(b, n, seed); });
}

null_table cached_chernoff(std::size_t b, double grid_step, double horizon,
                           std::uint64_t seed) {
  std::ostringstream name;
  name.precision(17);
  name << "chernoff_b" << b << "_g" << grid_step << "_h" << horizon << "_s"
       << seed << ".srnt";
  return cached_or_build(
      name.str(),
      {grid_step, horizon, 0.0, static_cast<double>(seed)}, b,
      [&] { return simulate_chernoff(b, grid_step, horizon, seed); });
}

interval lrs_ci(const series& s, double t, double alpha,
                const null_table& table) {
  validate(s);
  if (!(alpha > 0.0 && alpha < 1.0)) throw bad_level("lrs_ci: level outside (0, 1)");
  const std::size_t n = s.size();
  std::size_t l = left_count(s, t);
  if (l < 1 || l >= n)
    throw index_out_of_range("lrs_ci: t does not split the design");

  const double sigma2 = estimate_sigma2(s);
  const double threshold = sigma2 * table_quantile(table, 1.0 - alpha);
  step_fit free = pava(s.y);
  const double inner_lo = free.values[l - 1];  // statistic vanishes inside
  const double inner_hi = free.values[l];

  auto stat = [&](double phi) {
    step_fit pinned = constrained_pava(s.y, l, phi);
    return std::max(0.0, pinned.sse - free.sse);
  };

  auto boundary = [&](double inner, double direction) {
    // expand geometrically until the statistic clears the threshold, then
    // bisect; the statistic grows without bound, so expansion terminates
    double step = std::max(std::sqrt(std::max(sigma2, 1e-300)), 1e-8);
    double outer = inner;
    for (int i = 0; i < 200; ++i) {
      outer = inner + direction * step;
      if (stat(outer) > threshold) break;
      step *= 2.0;
    }
    double a = inner, bnd = outer;  // stat(a) <= threshold < stat(bnd)
    for (int i = 0; i < 200; ++i) {
      double mid = 0.5 * (a + bnd);
      if (mid == a || mid == bnd) break;
      if (stat(mid) <= threshold)
        a = mid;
      else
        bnd = mid;
    }
    return a;
  };

  interval out;
  out.point = eval_step([&] {
    step_fit f = free;
    f.xs = s.x;
    return f;
  }(), t);
  out.lo = boundary(inner_lo, -1.0);
  out.hi = boundary(inner_hi, 1.0);
  out.replications = table.samples.size();
  return out;
}

}  // namespace shapereg
