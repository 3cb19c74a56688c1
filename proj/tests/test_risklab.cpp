#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "shapereg/cone.hpp"
#include "shapereg/errors.hpp"
#include "shapereg/isotonic.hpp"
#include "shapereg/kahan.hpp"
#include "shapereg/risklab.hpp"
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

bool nondecreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] < v[i - 1]) return false;
  return true;
}

}  // namespace

TEST_CASE("signal construction") {
  scenario sc;
  sc.n = 5;

  sc.truth = truth_kind::constant;
  CHECK(linf(theta_star(sc), {0, 0, 0, 0, 0}) == 0.0);

  sc.truth = truth_kind::ramp;
  sc.v = 2.0;
  CHECK(linf(theta_star(sc), {0.0, 0.5, 1.0, 1.5, 2.0}) <= 1e-15);

  sc.truth = truth_kind::blocks;
  sc.k = 2;
  sc.v = 1.0;
  // five points, two blocks: the longer one leads
  CHECK(linf(theta_star(sc), {0.0, 0.0, 0.0, 1.0, 1.0}) == 0.0);
  CHECK((scenario_blocks(sc) == std::vector<std::size_t>{3, 2}));

  sc.truth = truth_kind::quadratic;
  auto q = theta_star(sc);
  CHECK(q[0] == doctest::Approx(1.0));
  CHECK(q[2] == doctest::Approx(0.0));
  CHECK(q[4] == doctest::Approx(1.0));
  CHECK(q[1] == doctest::Approx(0.25));

  sc.truth = truth_kind::valley;
  auto w = theta_star(sc);
  CHECK(w[0] == doctest::Approx(1.0));
  CHECK(w[2] == doctest::Approx(0.0));
  CHECK(w[4] == doctest::Approx(1.0));

  sc.truth = truth_kind::hybrid;
  sc.n = 20;
  sc.k = 3;
  auto h = theta_star(sc);
  REQUIRE(h.size() == 20);
  CHECK(nondecreasing(h));
  CHECK(h.front() == 0.0);
  CHECK(h.back() == doctest::Approx(1.0));
  CHECK(h[9] == doctest::Approx(0.5));  // steps exhaust half the variation

  scenario m;
  m.family = shape_family::matrix;
  m.truth = truth_kind::matrix_ramp;
  m.n1 = 2;
  m.n2 = 3;
  m.v = 2.0;
  auto t = theta_star(m);
  REQUIRE(t.size() == 6);
  CHECK(t[0] == doctest::Approx(0.0));
  CHECK(t[2] == doctest::Approx(1.0));   // (0, 1) -> v * (0 + 1)/2
  CHECK(t[3] == doctest::Approx(1.0));   // (1, 0)
  CHECK(t[5] == doctest::Approx(2.0));

  sc.truth = truth_kind::ramp;
  CHECK_THROWS_AS(scenario_blocks(sc), family_mismatch);
}

TEST_CASE("noise laws have the declared scale") {
  rng g(107);
  std::vector<double> theta(20000, 0.0), y;

  add_noise(y, theta, error_law::rademacher, 2.0, g);
  for (double v : y) CHECK(std::abs(v) == 2.0);

  for (auto law : {error_law::gaussian, error_law::t5}) {
    add_noise(y, theta, law, 2.0, g);
    kahan_sum s, s2;
    for (double v : y) {
      s.add(v);
      s2.add(v * v);
    }
    double mean = s.value() / 20000.0;
    double var = s2.value() / 20000.0 - mean * mean;
    CHECK(std::abs(mean) <= 0.06);
    CHECK(std::abs(var - 4.0) <= 0.3);
  }
}

TEST_CASE("blockwise means") {
  CHECK(linf(oracle_fit({1.0, 3.0, 2.0, 4.0}, {2, 2}), {2.0, 2.0, 3.0, 3.0}) ==
        0.0);
  CHECK(linf(oracle_fit({5.0, -1.0}, {2}), {2.0, 2.0}) == 0.0);
  CHECK(linf(oracle_fit({5.0, -1.0}, {1, 1}), {5.0, -1.0}) == 0.0);
  CHECK_THROWS_AS(oracle_fit({1.0, 2.0}, {3}), bad_partition);
  CHECK_THROWS_AS(oracle_fit({1.0, 2.0}, {1}), bad_partition);
  CHECK_THROWS_AS(oracle_fit({1.0, 2.0}, {0, 2}), bad_partition);
}

TEST_CASE("gaussian absolute moments") {
  CHECK(gaussian_abs_moment(1.0) ==
        doctest::Approx(std::sqrt(2.0 / std::numbers::pi)).epsilon(1e-14));
  CHECK(gaussian_abs_moment(2.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(gaussian_abs_moment(4.0) == doctest::Approx(3.0).epsilon(1e-13));
}

TEST_CASE("closed-form oracle risk") {
  // p = 2 collapses to sigma^2 k / n
  CHECK(lp_oracle_risk({25, 25, 25, 25}, 1.0, 2.0, 100) ==
        doctest::Approx(0.04).epsilon(1e-14));
  CHECK(lp_oracle_risk({50, 50}, 0.5, 2.0, 100) ==
        doctest::Approx(0.005).epsilon(1e-14));

  // p = 1, one block
  CHECK(lp_oracle_risk({100}, 1.0, 1.0, 100) ==
        doctest::Approx(std::sqrt(2.0 / std::numbers::pi) / 10.0)
            .epsilon(1e-13));

  CHECK_THROWS_AS(lp_oracle_risk({10, 10}, 1.0, 2.0, 25), bad_partition);
}

TEST_CASE("monte carlo matches the closed forms") {
  scenario sc;
  sc.family = shape_family::isotonic;
  sc.truth = truth_kind::blocks;
  sc.n = 100;
  sc.k = 4;
  sc.v = 3.0;

  auto r2 = mc_risk(sc, estimator_kind::oracle, 2.0, 2000, 2);
  CHECK(std::abs(r2.risk - 0.04) <= 3.0 * r2.se);

  auto r1 = mc_risk(sc, estimator_kind::oracle, 1.0, 2000, 3);
  CHECK(std::abs(r1.risk - lp_oracle_risk({25, 25, 25, 25}, 1.0, 1.0, 100)) <=
        3.0 * r1.se);

  auto r4 = mc_risk(sc, estimator_kind::oracle, 4.0, 2000, 4);
  CHECK(std::abs(r4.risk - lp_oracle_risk({25, 25, 25, 25}, 1.0, 4.0, 100)) <=
        3.0 * r4.se);

  // determinism and bookkeeping
  auto again = mc_risk(sc, estimator_kind::oracle, 2.0, 2000, 2);
  CHECK(again.risk == r2.risk);
  CHECK(again.se == r2.se);
  CHECK(r2.seed == 2);
  CHECK(r2.reps == 2000);
}

TEST_CASE("noiseless feasible truths are fixed points of every fitter") {
  scenario sc;
  sc.sigma = 0.0;

  sc.family = shape_family::isotonic;
  sc.truth = truth_kind::ramp;
  sc.n = 40;
  CHECK(mc_risk(sc, estimator_kind::lse, 2.0, 3, 1).risk <= 1e-16);

  sc.family = shape_family::convex;
  sc.truth = truth_kind::quadratic;
  CHECK(mc_risk(sc, estimator_kind::lse, 2.0, 3, 1).risk <= 1e-14);

  sc.family = shape_family::unimodal;
  sc.truth = truth_kind::valley;
  CHECK(mc_risk(sc, estimator_kind::lse, 2.0, 3, 1).risk <= 1e-16);

  scenario m;
  m.family = shape_family::matrix;
  m.truth = truth_kind::matrix_ramp;
  m.n1 = 6;
  m.n2 = 7;
  m.sigma = 0.0;
  CHECK(mc_risk(m, estimator_kind::lse, 2.0, 3, 1).risk <= 1e-12);
}

TEST_CASE("the monotone fit at a flat signal spends the harmonic number") {
  auto full = statistical_dimension(cone_tag::full_space, 7, 4000, 5);
  CHECK(std::abs(full.risk - 7.0) <= 3.0 * full.se);

  auto orth = statistical_dimension(cone_tag::orthant, 7, 4000, 6);
  CHECK(std::abs(orth.risk - 3.5) <= 3.0 * orth.se);

  auto mono = statistical_dimension(cone_tag::monotone, 10, 20000, 7);
  CHECK(std::abs(mono.risk - harmonic(10)) <= 3.0 * mono.se);

  CHECK(harmonic(1) == 1.0);
  CHECK(harmonic(2) == doctest::Approx(1.5));
  CHECK(harmonic(10) == doctest::Approx(2.9289682539682538).epsilon(1e-15));

  // the scaled mc_risk view of the same identity
  scenario sc;
  sc.family = shape_family::isotonic;
  sc.truth = truth_kind::constant;
  sc.n = 3;
  auto r = mc_risk(sc, estimator_kind::lse, 2.0, 20000, 8);
  CHECK(std::abs(r.risk - harmonic(3) / 3.0) <= 3.0 * r.se);
}

TEST_CASE("worst-case carriers") {
  scenario sc;
  sc.family = shape_family::isotonic;
  sc.truth = truth_kind::constant;
  sc.n = 50;
  sc.sigma = 2.0;
  CHECK(worst_case_bound_rhs(sc) ==
        doctest::Approx(4.0 * std::log(std::numbers::e * 50.0) / 50.0)
            .epsilon(1e-12));

  sc.truth = truth_kind::ramp;
  sc.v = 1.5;
  CHECK(worst_case_bound_rhs(sc) ==
        doctest::Approx(std::pow(4.0 * 1.5 / 50.0, 2.0 / 3.0) +
                        4.0 * std::log(std::numbers::e * 50.0) / 50.0)
            .epsilon(1e-12));

  // an affine convex truth leaves no variation after the trend line
  scenario cv;
  cv.family = shape_family::convex;
  cv.truth = truth_kind::ramp;
  cv.n = 50;
  cv.sigma = 1.0;
  CHECK(worst_case_bound_rhs(cv) ==
        doctest::Approx(std::pow(50.0, -0.8)).epsilon(1e-10));

  scenario mt;
  mt.family = shape_family::matrix;
  mt.truth = truth_kind::matrix_ramp;
  mt.n1 = 8;
  mt.n2 = 8;
  mt.v = 1.0;
  double ln = std::log(64.0);
  CHECK(worst_case_bound_rhs(mt) ==
        doctest::Approx(std::sqrt(1.0 / 64.0) * std::pow(ln, 4.0) +
                        std::pow(ln, 8.0) / 64.0)
            .epsilon(1e-12));

  scenario um;
  um.family = shape_family::unimodal;
  um.truth = truth_kind::valley;
  um.n = 50;
  um.v = 2.0;
  CHECK(worst_case_bound_rhs(um) ==
        doctest::Approx(std::pow(2.0 / 50.0, 2.0 / 3.0) +
                        std::pow(50.0, -2.0 / 3.0))
            .epsilon(1e-12));
}

TEST_CASE("oracle-inequality ladders") {
  // two flat points: one candidate, one block
  std::vector<double> flat{0.7, 0.7};
  CHECK(adaptive_bound_rhs(flat, 1.3, shape_family::isotonic, true) ==
        doctest::Approx(1.69 * 0.5 * std::log(2.0 * std::numbers::e))
            .epsilon(1e-12));

  // exact two-block truth: the truth itself is the best candidate
  std::vector<double> steps{0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0};
  CHECK(adaptive_bound_rhs(steps, 1.0, shape_family::isotonic, true) ==
        doctest::Approx(0.25 * std::log(4.0 * std::numbers::e))
            .epsilon(1e-12));
  // the loose constant scales the complexity term by four
  CHECK(adaptive_bound_rhs(steps, 1.0, shape_family::isotonic, false) ==
        doctest::Approx(std::log(4.0 * std::numbers::e)).epsilon(1e-12));

  // constant unimodal truth: k = 1, priced as k + 1
  std::vector<double> c3{2.0, 2.0, 2.0};
  CHECK(adaptive_bound_rhs(c3, 1.0, shape_family::unimodal, true) ==
        doctest::Approx((2.0 / 3.0) * std::log(1.5 * std::numbers::e))
            .epsilon(1e-12));

  // affine convex truth: one linear piece
  std::vector<double> aff{0.0, 1.0, 2.0, 3.0};
  CHECK(adaptive_bound_rhs(aff, 1.0, shape_family::convex, true) ==
        doctest::Approx(2.0 * std::log(4.0 * std::numbers::e))
            .epsilon(1e-12));

  CHECK_THROWS_AS(adaptive_bound_rhs(flat, 1.0, shape_family::matrix, true),
                  family_mismatch);
  CHECK_THROWS_AS(adaptive_bound_rhs({}, 1.0, shape_family::isotonic, true),
                  empty_input);
}

TEST_CASE("two-way oracle ladder") {
  matrix_data flat{2, 2, {1.0, 1.0, 1.0, 1.0}};
  double l8 = std::pow(std::log(std::numbers::e * 4.0), 8.0);
  CHECK(adaptive_bound_rhs_matrix(flat, 1.0) ==
        doctest::Approx(l8 / 4.0).epsilon(1e-12));

  matrix_data ramp{4, 4, std::vector<double>(16)};
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      ramp.at(i, j) = static_cast<double>(i + j) / 6.0;
  double bound = adaptive_bound_rhs_matrix(ramp, 0.1);
  CHECK(bound > 0.0);
  // never worse than the grand-mean candidate
  kahan_sum s;
  for (double v : ramp.a) s.add(v);
  double mean = s.value() / 16.0;
  kahan_sum gap;
  for (double v : ramp.a) gap.add((v - mean) * (v - mean));
  double l8r = std::pow(std::log(std::numbers::e * 16.0), 8.0);
  CHECK(bound <= gap.value() / 16.0 + 0.01 * l8r / 16.0 + 1e-12);
}

TEST_CASE("variation partition bound") {
  // exact level sets win when the truth is piecewise constant
  std::vector<double> steps{0.0, 0.0, 1.0, 1.0};
  CHECK(pro_bound_rhs(steps, 1.0, 1.0) ==
        doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));

  // constant truth, general p
  std::vector<double> flat(10, 3.0);
  CHECK(pro_bound_rhs(flat, 2.0, 3.0) ==
        doctest::Approx(8.0 * std::pow(0.1, 1.0)).epsilon(1e-12));

  // ramp: stays within a factor two of the balanced rate
  std::size_t n = 100;
  std::vector<double> ramp(n);
  for (std::size_t i = 0; i < n; ++i)
    ramp[i] = static_cast<double>(i) / static_cast<double>(n - 1);
  double rate = std::pow(1.0 / 100.0, 1.0 / 3.0) + std::pow(0.01, 0.5);
  double bound = pro_bound_rhs(ramp, 1.0, 1.0);
  CHECK(bound >= 0.5 * rate);
  CHECK(bound <= 2.0 * rate);

  CHECK_THROWS_AS(pro_bound_rhs(steps, 1.0, 2.0), bad_exponent);
  CHECK_THROWS_AS(pro_bound_rhs(steps, 1.0, 0.5), bad_exponent);
  CHECK_THROWS_AS(pro_bound_rhs({1.0, 0.0}, 1.0, 1.0), not_isotonic);
}

TEST_CASE("level sets and tangent projections") {
  CHECK((tangent_cone_isotonic({0.0, 0.0, 1.0}) ==
         std::vector<std::size_t>{2, 1}));
  CHECK((tangent_cone_isotonic({5.0, 5.0, 5.0}) ==
         std::vector<std::size_t>{3}));
  CHECK((tangent_cone_isotonic({1.0, 2.0, 3.0}) ==
         std::vector<std::size_t>{1, 1, 1}));
  CHECK_THROWS_AS(tangent_cone_isotonic({1.0, 0.0}), not_isotonic);

  // blockwise pooling equals the projection onto the within-block chains
  std::vector<double> theta{0.0, 0.0, 1.0, 1.0, 1.0, 2.0};
  auto lengths = tangent_cone_isotonic(theta);
  REQUIRE((lengths == std::vector<std::size_t>{2, 3, 1}));

  std::vector<std::pair<std::size_t, std::size_t>> edges{
      {0, 1}, {2, 3}, {3, 4}};
  auto cone = edge_cone(6, edges);
  rng gen(109);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<double> z(6);
    for (auto& v : z) v = gen.normal();
    auto blockwise = project_tangent_blocks(lengths, z);
    auto direct = project_cone(z, cone);
    REQUIRE(direct.converged);
    CHECK(linf(blockwise, direct.theta_hat) <= 1e-8);

    // squared norms add across blocks
    double total = sum_squares(blockwise);
    kahan_sum per_block;
    std::size_t at = 0;
    for (std::size_t len : lengths) {
      std::vector<double> seg(z.begin() + static_cast<std::ptrdiff_t>(at),
                              z.begin() + static_cast<std::ptrdiff_t>(at + len));
      per_block.add(sum_squares(pava(seg).values));
      at += len;
    }
    CHECK(total == doctest::Approx(per_block.value()).epsilon(1e-12));
  }

  CHECK_THROWS_AS(project_tangent_blocks({2, 2}, {1.0, 2.0, 3.0}),
                  bad_partition);
}

TEST_CASE("monte carlo risk respects the oracle ladder") {
  scenario sc;
  sc.family = shape_family::isotonic;
  sc.truth = truth_kind::blocks;
  sc.n = 50;
  sc.k = 2;
  sc.v = 1.0;

  auto mc = mc_risk(sc, estimator_kind::lse, 2.0, 400, 9);
  double bound =
      adaptive_bound_rhs(theta_star(sc), 1.0, shape_family::isotonic, false);
  CHECK(mc.risk <= bound + 3.0 * mc.se);

  // and the sharp gaussian version
  double sharp =
      adaptive_bound_rhs(theta_star(sc), 1.0, shape_family::isotonic, true);
  CHECK(mc.risk <= sharp + 3.0 * mc.se);
  CHECK(sharp <= bound);
}

TEST_CASE("slope extraction") {
  std::vector<std::pair<double, double>> pts;
  for (double n : {100.0, 1000.0, 10000.0, 100000.0})
    pts.push_back({n, std::pow(n, -2.0 / 3.0)});
  CHECK(rate_slope(pts) == doctest::Approx(-2.0 / 3.0).epsilon(1e-12));

  std::vector<std::pair<double, double>> flat;
  for (double n : {100.0, 1000.0, 10000.0, 100000.0}) flat.push_back({n, 0.5});
  CHECK(rate_slope(flat) == doctest::Approx(0.0));

  std::vector<std::pair<double, double>> narrow{
      {100.0, 1.0}, {200.0, 0.9}, {300.0, 0.8}, {400.0, 0.7}};
  CHECK_THROWS_AS(rate_slope(narrow), too_few_points);
  CHECK_THROWS_AS(rate_slope({{100.0, 1.0}, {1000.0, 0.5}, {10000.0, 0.2}}),
                  too_few_points);
  std::vector<std::pair<double, double>> bad{
      {100.0, 1.0}, {1000.0, -0.5}, {10000.0, 0.2}, {100000.0, 0.1}};
  CHECK_THROWS_AS(rate_slope(bad), invalid_input);
}
