#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "oracle_projection.hpp"
#include "shapereg/errors.hpp"
#include "shapereg/isotonic.hpp"
#include "shapereg/kahan.hpp"
#include "shapereg/rng.hpp"

using namespace shapereg;

namespace {

double linf(const std::vector<double>& a, const std::vector<double>& b) {
  REQUIRE(a.size() == b.size());
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

template <class F>
void for_all_vectors(std::size_t n, const std::vector<double>& alphabet,
                     F&& body) {
  std::vector<std::size_t> digit(n, 0);
  std::vector<double> v(n);
  while (true) {
    for (std::size_t i = 0; i < n; ++i) v[i] = alphabet[digit[i]];
    body(v);
    std::size_t i = 0;
    while (i < n && ++digit[i] == alphabet.size()) digit[i++] = 0;
    if (i == n) break;
  }
}

std::vector<double> minmax_all(const std::vector<double>& y) {
  std::vector<double> out(y.size());
  for (std::size_t j = 0; j < y.size(); ++j) out[j] = minmax_value(y, j);
  return out;
}

void check_three_way(const std::vector<double>& y) {
  auto p = pava(y);
  CHECK(linf(p.values, minmax_all(y)) <= 1e-9);
  CHECK(linf(p.values, slope_fit(on_grid(y)).values) <= 1e-9);
}

// the pin theta_{l-1} <= phi0 <= theta_l as explicit halfspaces
std::vector<double> pinned_oracle(const std::vector<double>& y, std::size_t l,
                                  double phi0) {
  const std::size_t n = y.size();
  std::vector<oracle::halfspace> rows;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    std::vector<double> a(n, 0.0);
    a[i] = 1.0;
    a[i + 1] = -1.0;
    rows.push_back({a, 0.0});
  }
  std::vector<double> lo(n, 0.0), hi(n, 0.0);
  lo[l - 1] = 1.0;   // theta_{l-1} <= phi0
  hi[l] = -1.0;      // -theta_l <= -phi0
  rows.push_back({lo, phi0});
  rows.push_back({hi, -phi0});
  return oracle::project(y, rows);
}

}  // namespace

TEST_CASE("pooling examples") {
  auto f = pava({3.0, 1.0, 2.0});
  CHECK(linf(f.values, {2.0, 2.0, 2.0}) == 0.0);
  REQUIRE(f.blocks.size() == 1);
  CHECK(f.blocks[0].lo == 0);
  CHECK(f.blocks[0].hi == 2);
  CHECK(f.blocks[0].value == 2.0);
  CHECK(f.sse == doctest::Approx(2.0));

  auto g = pava({1.0, 3.0, 2.0, 4.0});
  CHECK(linf(g.values, {1.0, 2.5, 2.5, 4.0}) == 0.0);
  REQUIRE(g.blocks.size() == 3);
  CHECK(g.blocks[1].lo == 1);
  CHECK(g.blocks[1].hi == 2);
  CHECK(g.sse == doctest::Approx(0.5));
}

TEST_CASE("block values are block means and means are strictly increasing") {
  rng gen(3);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<double> y(12);
    for (auto& v : y) v = gen.normal();
    auto f = pava(y);
    double total_w = 0.0;
    for (const auto& b : f.blocks) {
      kahan_sum s;
      for (std::size_t i = b.lo; i <= b.hi; ++i) s.add(y[i]);
      double w = static_cast<double>(b.hi - b.lo + 1);
      CHECK(b.value == doctest::Approx(s.value() / w).epsilon(1e-12));
      CHECK(b.weight == doctest::Approx(w));
      total_w += w;
    }
    CHECK(total_w == doctest::Approx(12.0));
    for (std::size_t k = 1; k < f.blocks.size(); ++k)
      CHECK(f.blocks[k - 1].value < f.blocks[k].value);
  }
}

TEST_CASE("three independent characterizations agree") {
  // exhaustive on short integer inputs
  for (std::size_t n = 1; n <= 4; ++n)
    for_all_vectors(n, {-3, -2, -1, 0, 1, 2, 3},
                    [&](const std::vector<double>& y) { check_three_way(y); });
  for (std::size_t n = 5; n <= 6; ++n)
    for_all_vectors(n, {-1, 0, 1},
                    [&](const std::vector<double>& y) { check_three_way(y); });

  // random longer inputs
  rng gen(17);
  for (int rep = 0; rep < 2000; ++rep) {
    std::size_t n = 5 + static_cast<std::size_t>(gen.uniform_below(8));
    std::vector<double> y(n);
    for (auto& v : y) v = std::floor(gen.uniform01() * 7.0) - 3.0;
    check_three_way(y);
  }
}

TEST_CASE("weighted fits: replication equivalence and mean preservation") {
  rng gen(5);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<double> y(6), w(6);
    for (auto& v : y) v = gen.normal();
    for (auto& v : w) v = 1.0 + gen.uniform_below(3);

    auto f = pava(y, w);

    // weighted mean preserved
    kahan_sum wy, wt;
    for (std::size_t i = 0; i < y.size(); ++i) {
      wy.add(w[i] * (y[i] - f.values[i]));
      wt.add(w[i]);
    }
    CHECK(std::abs(wy.value()) <= 1e-10 * wt.value());

    // integer weights behave like repeated observations
    std::vector<double> rep_y;
    for (std::size_t i = 0; i < y.size(); ++i)
      for (int k = 0; k < static_cast<int>(w[i]); ++k) rep_y.push_back(y[i]);
    auto g = pava(rep_y);
    std::size_t pos = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      CHECK(g.values[pos] == doctest::Approx(f.values[i]).epsilon(1e-12));
      pos += static_cast<std::size_t>(w[i]);
    }
  }

  // unit weights match the unweighted path exactly
  std::vector<double> y{2.0, -1.0, 0.5, 0.5, 3.0};
  CHECK(linf(pava(y).values, pava(y, {1, 1, 1, 1, 1}).values) == 0.0);
}

TEST_CASE("direction flips by reflection") {
  rng gen(9);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<double> y(7);
    for (auto& v : y) v = gen.normal();

    auto dec = pava(y, {}, monotone_direction::nonincreasing);

    std::vector<double> neg(y);
    for (auto& v : neg) v = -v;
    auto via_neg = pava(neg);
    for (auto& v : via_neg.values) v = -v;
    CHECK(linf(dec.values, via_neg.values) <= 1e-12);

    std::vector<double> rev(y.rbegin(), y.rend());
    auto via_rev = pava(rev);
    std::reverse(via_rev.values.begin(), via_rev.values.end());
    CHECK(linf(dec.values, via_rev.values) <= 1e-12);
  }
}

TEST_CASE("fitting is a monotone operator") {
  rng gen(13);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<double> y(10), z(10);
    for (std::size_t i = 0; i < 10; ++i) {
      y[i] = gen.normal();
      z[i] = y[i] + gen.uniform01();  // z >= y pointwise
    }
    auto fy = pava(y);
    auto fz = pava(z);
    for (std::size_t i = 0; i < 10; ++i)
      CHECK(fy.values[i] <= fz.values[i] + 1e-12);
  }
}

TEST_CASE("cumulative sum diagram") {
  auto d1 = csd(on_grid({1.0, 1.0}));
  CHECK(linf(d1.knots, {0.0, 0.5, 1.0}) <= 1e-15);
  CHECK(linf(d1.values, {0.0, 0.5, 1.0}) <= 1e-15);

  auto d2 = csd(on_grid({2.0, 0.0}));
  CHECK(linf(d2.values, {0.0, 1.0, 1.0}) <= 1e-15);

  auto d3 = csd(on_grid({1.0, -1.0, 1.0}));
  CHECK(linf(d3.knots, {0.0, 1.0 / 3, 2.0 / 3, 1.0}) <= 1e-15);
  CHECK(linf(d3.values, {0.0, 1.0 / 3, 0.0, 1.0 / 3}) <= 1e-12);

  // designs not inside (0, 1] are rescaled onto [1/n, 1]
  auto d4 = csd({{1.0, 2.0, 3.0}, {1.0, -1.0, 1.0}});
  CHECK(linf(d4.knots, {0.0, 1.0 / 3, 2.0 / 3, 1.0}) <= 1e-12);
  CHECK(linf(d4.values, d3.values) <= 1e-12);
}

TEST_CASE("greatest convex minorant") {
  piecewise_linear tent{{0.0, 0.5, 1.0}, {0.0, 1.0, 0.0}};
  auto hull = gcm(tent);
  CHECK(eval_pl(hull, 0.0) == doctest::Approx(0.0));
  CHECK(eval_pl(hull, 0.25) == doctest::Approx(0.0));
  CHECK(eval_pl(hull, 0.5) == doctest::Approx(0.0));
  CHECK(eval_pl(hull, 1.0) == doctest::Approx(0.0));

  piecewise_linear f{{0.0, 1.0 / 3, 2.0 / 3, 1.0}, {0.0, 1.0, 0.5, 2.0}};
  auto h = gcm(f);
  REQUIRE(h.knots.size() == 3);
  CHECK(h.knots[1] == doctest::Approx(2.0 / 3));
  CHECK(linf(h.values, {0.0, 0.5, 2.0}) <= 1e-12);

  // minorant property on a dense sweep
  rng gen(21);
  piecewise_linear g;
  g.knots = {0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
  g.values.resize(6);
  for (int rep = 0; rep < 50; ++rep) {
    for (auto& v : g.values) v = gen.normal();
    auto m = gcm(g);
    for (int t = 0; t <= 100; ++t) {
      double u = t / 100.0;
      CHECK(eval_pl(m, u) <= eval_pl(g, u) + 1e-12);
    }
  }
}

TEST_CASE("pinned fits") {
  auto a = constrained_pava({1.0, 2.0, 3.0}, 2, 0.0);
  CHECK(linf(a.values, {0.0, 0.0, 3.0}) == 0.0);

  auto b = constrained_pava({1.0, 2.0, 3.0}, 2, 2.0);
  CHECK(linf(b.values, {1.0, 2.0, 3.0}) == 0.0);

  auto c = constrained_pava({0.0, 0.0}, 1, -1.0);
  CHECK(linf(c.values, {-1.0, 0.0}) == 0.0);

  CHECK_THROWS_AS(constrained_pava({1.0, 2.0}, 0, 0.0), index_out_of_range);
  CHECK_THROWS_AS(constrained_pava({1.0, 2.0}, 2, 0.0), index_out_of_range);
}

TEST_CASE("pinned fit solves the halfspace program") {
  for (std::size_t n = 2; n <= 4; ++n) {
    for_all_vectors(n, {-1.0, 0.0, 1.0, 2.0}, [&](const std::vector<double>& y) {
      for (std::size_t l = 1; l < n; ++l)
        for (double phi0 : {-1.5, 0.0, 0.5}) {
          auto fit = constrained_pava(y, l, phi0);
          CHECK(linf(fit.values, pinned_oracle(y, l, phi0)) <= 1e-7);
        }
    });
  }
  rng gen(29);
  for (int rep = 0; rep < 300; ++rep) {
    std::size_t n = 5 + static_cast<std::size_t>(gen.uniform_below(2));
    std::vector<double> y(n);
    for (auto& v : y) v = std::floor(gen.uniform01() * 7.0) - 3.0;
    std::size_t l = 1 + static_cast<std::size_t>(gen.uniform_below(n - 1));
    double phi0 = std::floor(gen.uniform01() * 5.0) / 2.0 - 1.0;
    auto fit = constrained_pava(y, l, phi0);
    CHECK(linf(fit.values, pinned_oracle(y, l, phi0)) <= 1e-7);
  }
}

TEST_CASE("step evaluation is left continuous on the canonical grid") {
  auto f = pava({1.0, 3.0, 2.0, 4.0});
  CHECK(eval_step(f, 0.5) == doctest::Approx(2.5));
  CHECK(eval_step(f, 0.25) == doctest::Approx(1.0));
  CHECK(eval_step(f, 0.26) == doctest::Approx(2.5));
  CHECK(eval_step(f, 0.1) == doctest::Approx(1.0));  // constant below x_0
  CHECK(eval_step(f, 1.0) == doctest::Approx(4.0));
  CHECK_THROWS_AS(eval_step(f, 1.01), out_of_domain);
  CHECK_THROWS_AS(eval_step(f, 0.0), out_of_domain);
  CHECK_THROWS_AS(eval_step(f, -0.5), out_of_domain);

  CHECK(step_x(f, 0) == doctest::Approx(0.25));
  CHECK(step_x(f, 3) == doctest::Approx(1.0));
  CHECK_THROWS_AS(step_x(f, 4), index_out_of_range);
}

TEST_CASE("input validation") {
  CHECK_THROWS_AS(pava({}), empty_input);
  CHECK_THROWS_AS(pava({1.0}, {1.0, 2.0}), dim_mismatch);
  CHECK_THROWS_AS(pava({1.0, 2.0}, {1.0, 0.0}), invalid_input);
  CHECK_THROWS_AS(minmax_value({1.0}, 1), index_out_of_range);
  CHECK_THROWS_AS(eval_pl({{0.0, 1.0}, {0.0, 1.0}}, 1.5), out_of_domain);
}
