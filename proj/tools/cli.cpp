#include "cli.hpp"

#include <array>
#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "shapereg/additive.hpp"
#include "shapereg/errors.hpp"
#include "shapereg/inference.hpp"
#include "shapereg/isotonic.hpp"
#include "shapereg/partial_order.hpp"
#include "shapereg/risklab.hpp"
#include "shapereg/rng.hpp"
#include "shapereg/series.hpp"
#include "shapereg/shapes.hpp"

namespace shapereg::cli {
namespace {

using json = nlohmann::ordered_json;

constexpr const char* schema_tag = "shapereg/1";

// ---- options ----

struct opts {
  std::string input;
  std::string out = "-";
  std::uint64_t seed = default_seed;
  double tol = 0.0;  // 0 means the solver default
  std::uint64_t reps = 0;
  double alpha = 0.05;
  double bandwidth = 0.0;  // 0 means 0.5 n^{-1/5}
  std::string scheme = "smoothed";
  double p = 2.0;
  double t = 0.0;
  std::uint64_t k = 0;
  std::string order = "coordinatewise";
  std::string edges;
  std::string shapes;
  std::uint64_t candidates = 0;
  std::uint64_t refine = 0;
  double grid_step = 0.001;
  double horizon = 3.0;
  std::uint64_t table_n = 1000;
  std::string table;
  bool seed_given = false;
};

double tol_or(const opts& o, double fallback) {
  return o.tol > 0.0 ? o.tol : fallback;
}

// ---- text IO ----

std::string fmt(double v) {
  std::array<char, 64> buf;
  auto [p, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), p);
}

void write_text(const std::string& out, const std::string& content) {
  if (out.empty() || out == "-") {
    std::cout << content;
    return;
  }
  std::ofstream f(out, std::ios::binary);
  if (!f) throw io_error("cannot open output file: " + out);
  f << content;
  if (!f) throw io_error("write failed: " + out);
}

void write_json(const opts& o, const json& j) {
  write_text(o.out, j.dump(2) + "\n");
}

// ---- CSV input ----

struct csv_table {
  std::vector<std::string> header;  // empty when the file has none
  std::vector<std::vector<double>> rows;
  std::size_t width = 0;
};

bool parse_cell(std::string cell, double& out) {
  // trim spaces and a trailing CR
  while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\t' ||
                           cell.back() == '\r'))
    cell.pop_back();
  std::size_t at = 0;
  while (at < cell.size() && (cell[at] == ' ' || cell[at] == '\t')) ++at;
  cell.erase(0, at);
  if (cell.empty()) return false;
  char* end = nullptr;
  out = std::strtod(cell.c_str(), &end);
  return end == cell.c_str() + cell.size();
}

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  cells.push_back(cur);
  return cells;
}

csv_table read_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw io_error("cannot open input file: " + path);
  csv_table t;
  std::string line;
  std::size_t lineno = 0;
  bool first = true;
  while (std::getline(f, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto cells = split_commas(line);
    std::vector<double> row(cells.size());
    bool numeric = true;
    for (std::size_t i = 0; i < cells.size(); ++i)
      if (!parse_cell(cells[i], row[i])) {
        numeric = false;
        break;
      }
    if (first) {
      first = false;
      t.width = cells.size();
      if (!numeric) {
        for (auto& c : cells) t.header.push_back(c);
        continue;
      }
    }
    if (!numeric)
      throw io_error(path + ":" + std::to_string(lineno) +
                     ": non-numeric cell outside the header row");
    if (cells.size() != t.width)
      throw io_error(path + ":" + std::to_string(lineno) +
                     ": expected " + std::to_string(t.width) + " columns");
    t.rows.push_back(std::move(row));
  }
  if (t.rows.empty()) throw empty_input(path + ": no data rows");
  return t;
}

std::vector<double> column(const csv_table& t, std::size_t j) {
  std::vector<double> v(t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) v[i] = t.rows[i][j];
  return v;
}

// 1 column: y on the canonical grid. 2 columns: x then y.
series series_from(const csv_table& t, const std::string& path) {
  if (t.width == 1) return on_grid(column(t, 0));
  if (t.width == 2) {
    series s{column(t, 0), column(t, 1)};
    validate(s);
    return s;
  }
  throw invalid_input(path + ": expected one column (y) or two (x,y)");
}

std::vector<double> response_from(const csv_table& t, const std::string& path) {
  if (t.width == 1) return column(t, 0);
  if (t.width == 2) {
    series s{column(t, 0), column(t, 1)};
    validate(s);
    return s.y;
  }
  throw invalid_input(path + ": expected one column (y) or two (x,y)");
}

// multivariate layout: x1..xd then y in the last column
std::pair<std::vector<point>, std::vector<double>> design_from(
    const csv_table& t, const std::string& path) {
  if (t.width < 2)
    throw invalid_input(path + ": expected columns x1..xd followed by y");
  std::vector<point> X(t.rows.size());
  std::vector<double> y(t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    X[i].assign(t.rows[i].begin(), t.rows[i].end() - 1);
    y[i] = t.rows[i].back();
  }
  return {std::move(X), std::move(y)};
}

std::vector<std::pair<std::size_t, std::size_t>> read_edges(
    const std::string& path) {
  std::ifstream f(path);
  if (!f) throw io_error("cannot open edge file: " + path);
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::istringstream is(line);
    long long i = -1, j = -1;
    if (!(is >> i >> j) || i < 0 || j < 0)
      throw io_error(path + ":" + std::to_string(lineno) +
                     ": expected two nonnegative indices per line");
    std::string rest;
    if (is >> rest)
      throw io_error(path + ":" + std::to_string(lineno) +
                     ": expected exactly two indices per line");
    edges.emplace_back(static_cast<std::size_t>(i),
                       static_cast<std::size_t>(j));
  }
  return edges;
}

// ---- JSON builders ----

json blocks_json(const std::vector<step_block>& blocks) {
  json arr = json::array();
  for (const auto& b : blocks)
    arr.push_back({{"lo", b.lo}, {"hi", b.hi}, {"value", b.value}});
  return arr;
}

json blocks_json(const std::vector<fit_block>& blocks) {
  json arr = json::array();
  for (const auto& b : blocks)
    arr.push_back({{"lo", b.lo}, {"hi", b.hi}, {"value", b.value}});
  return arr;
}

json header_json(const std::string& command) {
  json j;
  j["schema"] = schema_tag;
  j["command"] = command;
  return j;
}

// ---- handlers ----

int cmd_fit_iso(const opts& o, bool nonincreasing) {
  csv_table t = read_csv(o.input);
  std::vector<double> y = response_from(t, o.input);
  step_fit fit = pava(y, {},
                      nonincreasing ? monotone_direction::nonincreasing
                                    : monotone_direction::nondecreasing);
  json j = header_json("fit-iso");
  j["n"] = y.size();
  j["theta_hat"] = fit.values;
  j["blocks"] = blocks_json(fit.blocks);
  j["sse"] = fit.sse;
  write_json(o, j);
  return 0;
}

int cmd_fit_unimodal(const opts& o) {
  csv_table t = read_csv(o.input);
  std::vector<double> y = response_from(t, o.input);
  unimodal_fit fit = fit_unimodal(y);
  json j = header_json("fit-unimodal");
  j["n"] = y.size();
  j["theta_hat"] = fit.values;
  j["mode"] = fit.mode;
  j["sse"] = fit.sse;
  write_json(o, j);
  return 0;
}

int cmd_fit_convex(const opts& o) {
  csv_table t = read_csv(o.input);
  series s = series_from(t, o.input);
  fit_result fit = fit_convex1d(s, tol_or(o, 1e-9));
  json j = header_json("fit-convex");
  j["n"] = s.size();
  j["theta_hat"] = fit.theta_hat;
  j["knots"] = fit.knots;
  j["sse"] = fit.sse;
  j["kkt_residual"] = fit.kkt_residual;
  j["iterations"] = fit.iterations;
  j["converged"] = fit.converged;
  write_json(o, j);
  return fit.converged ? 0 : 2;
}

int cmd_fit_kmono(const opts& o) {
  csv_table t = read_csv(o.input);
  std::vector<double> y;
  if (t.width == 2) {
    series s{column(t, 0), column(t, 1)};
    validate(s);
    if (!equispaced(s.x))
      throw invalid_input(
          "fit-kmono needs an equispaced design; supply y only or "
          "equispaced x");
    y = s.y;
  } else {
    y = response_from(t, o.input);
  }
  fit_result fit = fit_k_monotone(y, o.k, tol_or(o, 1e-9));
  json j = header_json("fit-kmono");
  j["n"] = y.size();
  j["k"] = o.k;
  j["theta_hat"] = fit.theta_hat;
  j["blocks"] = blocks_json(fit.blocks);
  j["sse"] = fit.sse;
  j["kkt_residual"] = fit.kkt_residual;
  j["iterations"] = fit.iterations;
  j["converged"] = fit.converged;
  write_json(o, j);
  return fit.converged ? 0 : 2;
}

int cmd_fit_matrix(const opts& o) {
  csv_table t = read_csv(o.input);
  matrix_data m;
  m.n1 = t.rows.size();
  m.n2 = t.width;
  m.a.reserve(m.n1 * m.n2);
  for (const auto& row : t.rows)
    m.a.insert(m.a.end(), row.begin(), row.end());
  matrix_fit fit = fit_matrix_isotonic(m, tol_or(o, 1e-9));
  json j = header_json("fit-matrix");
  j["n1"] = fit.n1;
  j["n2"] = fit.n2;
  j["theta_hat"] = fit.theta_hat;
  j["sse"] = fit.sse;
  j["kkt_residual"] = fit.kkt_residual;
  j["iterations"] = fit.iterations;
  j["converged"] = fit.converged;
  write_json(o, j);
  return fit.converged ? 0 : 2;
}

order_kind parse_order(const std::string& name) {
  if (name == "coordinatewise") return order_kind::coordinatewise;
  if (name == "weak-majorization") return order_kind::weak_majorization;
  if (name == "explicit") return order_kind::explicit_edges;
  throw invalid_input(
      "unknown order '" + name +
      "'; expected coordinatewise, weak-majorization, or explicit");
}

int cmd_fit_po(const opts& o) {
  csv_table t = read_csv(o.input);
  auto [X, y] = design_from(t, o.input);
  order_relation rel;
  rel.kind = parse_order(o.order);
  if (rel.kind == order_kind::explicit_edges) {
    if (o.edges.empty())
      throw invalid_input("--edges is required for the explicit order");
    rel.edges = read_edges(o.edges);
  }
  po_fit fit = fit_isotonic_po(X, y, rel, tol_or(o, 1e-9));
  json j = header_json("fit-po");
  j["n"] = y.size();
  j["d"] = X.front().size();
  j["order"] = o.order;
  j["theta_hat"] = fit.theta_hat;
  j["sse"] = fit.sse;
  j["kkt_residual"] = fit.kkt_residual;
  j["iterations"] = fit.iterations;
  j["converged"] = fit.converged;
  write_json(o, j);
  return fit.converged ? 0 : 2;
}

shape1d parse_shape(const std::string& name) {
  if (name == "inc" || name == "nondecreasing") return shape1d::nondecreasing;
  if (name == "dec" || name == "nonincreasing") return shape1d::nonincreasing;
  if (name == "convex") return shape1d::convex;
  throw invalid_input("unknown shape '" + name +
                      "'; expected inc, dec, or convex");
}

const char* shape_name(shape1d s) {
  switch (s) {
    case shape1d::nondecreasing: return "nondecreasing";
    case shape1d::nonincreasing: return "nonincreasing";
    case shape1d::convex: return "convex";
  }
  return "?";
}

int cmd_fit_additive(const opts& o) {
  csv_table t = read_csv(o.input);
  auto [X, y] = design_from(t, o.input);
  const std::size_t d = X.front().size();
  std::vector<shape1d> shapes(d, shape1d::nondecreasing);
  if (!o.shapes.empty()) {
    auto parts = split_commas(o.shapes);
    if (parts.size() != d)
      throw invalid_input("--shapes needs one entry per design coordinate (" +
                          std::to_string(d) + ")");
    for (std::size_t k = 0; k < d; ++k) shapes[k] = parse_shape(parts[k]);
  }
  additive_fit fit = backfit_additive(X, y, shapes, tol_or(o, 1e-10));
  json j = header_json("fit-additive");
  j["n"] = y.size();
  j["d"] = d;
  j["mu_hat"] = fit.mu_hat;
  json comps = json::array();
  for (const auto& c : fit.components) {
    json cj;
    cj["shape"] = shape_name(c.shape);
    cj["xs"] = c.xs;
    cj["values"] = c.values;
    cj["weights"] = c.weights;
    comps.push_back(std::move(cj));
  }
  j["components"] = std::move(comps);
  j["sse"] = fit.sse;
  j["cycles"] = fit.cycles;
  j["converged"] = fit.converged;
  write_json(o, j);
  return fit.converged ? 0 : 2;
}

int cmd_fit_sindex(const opts& o) {
  csv_table t = read_csv(o.input);
  auto [X, y] = design_from(t, o.input);
  if (X.front().size() < 2)
    throw invalid_input("fit-sindex needs at least two design coordinates");
  single_index_fit fit =
      fit_monotone_single_index(X, y, o.candidates, o.refine);
  json j = header_json("fit-sindex");
  j["n"] = y.size();
  j["d"] = X.front().size();
  j["beta_hat"] = fit.beta_hat;
  j["psi"] = {{"xs", fit.psi_hat.xs}, {"values", fit.psi_hat.values}};
  j["sse"] = fit.sse;
  write_json(o, j);
  return 0;
}

bootstrap_scheme parse_scheme(const std::string& name) {
  if (name == "smoothed") return bootstrap_scheme::smoothed;
  if (name == "naive_lse") return bootstrap_scheme::naive_lse;
  if (name == "pairs") return bootstrap_scheme::pairs;
  throw invalid_input("unknown scheme '" + name +
                      "'; expected smoothed, naive_lse, or pairs");
}

int cmd_ci_bootstrap(const opts& o) {
  csv_table tab = read_csv(o.input);
  series s = series_from(tab, o.input);
  const std::size_t b = o.reps ? o.reps : 1000;
  const double h = o.bandwidth > 0.0 ? o.bandwidth : default_bandwidth(s.size());
  interval ci = bootstrap_ci(s, o.t, o.alpha, b, parse_scheme(o.scheme), h,
                             o.seed);
  json j = header_json("ci-bootstrap");
  j["n"] = s.size();
  j["t"] = o.t;
  j["alpha"] = o.alpha;
  j["scheme"] = o.scheme;
  j["bandwidth"] = h;
  j["replications"] = ci.replications;
  j["seed"] = o.seed;
  j["point"] = ci.point;
  j["lo"] = ci.lo;
  j["hi"] = ci.hi;
  write_json(o, j);
  return 0;
}

int cmd_ci_lrs(const opts& o) {
  csv_table tab = read_csv(o.input);
  series s = series_from(tab, o.input);
  null_table table;
  if (!o.table.empty()) {
    table = load_null_table(o.table);
  } else {
    const std::size_t b = o.reps ? o.reps : 10000;
    table = cached_lrs_null(b, o.table_n, o.seed);
  }
  interval ci = lrs_ci(s, o.t, o.alpha, table);
  json j = header_json("ci-lrs");
  j["n"] = s.size();
  j["t"] = o.t;
  j["alpha"] = o.alpha;
  j["sigma2_hat"] = estimate_sigma2(s);
  j["table"] = {{"replications", table.samples.size()},
                {"n", table.params[2]},
                {"seed", table.params[3]}};
  j["point"] = ci.point;
  j["lo"] = ci.lo;
  j["hi"] = ci.hi;
  write_json(o, j);
  return 0;
}

json quantiles_json(const null_table& t) {
  json q;
  q["q50"] = table_quantile(t, 0.50);
  q["q75"] = table_quantile(t, 0.75);
  q["q90"] = table_quantile(t, 0.90);
  q["q95"] = table_quantile(t, 0.95);
  q["q99"] = table_quantile(t, 0.99);
  return q;
}

int cmd_sim_chernoff(const opts& o) {
  const std::size_t b = o.reps ? o.reps : 10000;
  null_table t = cached_chernoff(b, o.grid_step, o.horizon, o.seed);
  if (!o.table.empty()) save_null_table(o.table, t);
  json j = header_json("sim-chernoff");
  j["replications"] = t.samples.size();
  j["grid_step"] = t.params[0];
  j["horizon"] = t.params[1];
  j["seed"] = o.seed;
  j["quantiles"] = quantiles_json(t);
  write_json(o, j);
  return 0;
}

int cmd_sim_lrs_null(const opts& o) {
  const std::size_t b = o.reps ? o.reps : 10000;
  null_table t = cached_lrs_null(b, o.table_n, o.seed);
  if (!o.table.empty()) save_null_table(o.table, t);
  json j = header_json("sim-lrs-null");
  j["replications"] = t.samples.size();
  j["n"] = t.params[2];
  j["seed"] = o.seed;
  j["quantiles"] = quantiles_json(t);
  write_json(o, j);
  return 0;
}

// ---- risk-sim ----

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key()))
      throw invalid_input(where + ": unknown key '" + it.key() + "'");
}

shape_family parse_family(const std::string& name) {
  if (name == "isotonic") return shape_family::isotonic;
  if (name == "convex") return shape_family::convex;
  if (name == "matrix") return shape_family::matrix;
  if (name == "unimodal") return shape_family::unimodal;
  throw invalid_input("unknown family '" + name + "'");
}

const char* family_name(shape_family f) {
  switch (f) {
    case shape_family::isotonic: return "isotonic";
    case shape_family::convex: return "convex";
    case shape_family::matrix: return "matrix";
    case shape_family::unimodal: return "unimodal";
  }
  return "?";
}

truth_kind parse_truth(const std::string& name) {
  if (name == "constant") return truth_kind::constant;
  if (name == "ramp") return truth_kind::ramp;
  if (name == "blocks") return truth_kind::blocks;
  if (name == "hybrid") return truth_kind::hybrid;
  if (name == "quadratic") return truth_kind::quadratic;
  if (name == "matrix_ramp") return truth_kind::matrix_ramp;
  if (name == "valley") return truth_kind::valley;
  throw invalid_input("unknown truth '" + name + "'");
}

error_law parse_law(const std::string& name) {
  if (name == "gaussian") return error_law::gaussian;
  if (name == "rademacher") return error_law::rademacher;
  if (name == "t5") return error_law::t5;
  throw invalid_input("unknown law '" + name + "'");
}

estimator_kind parse_estimator(const std::string& name) {
  if (name == "lse") return estimator_kind::lse;
  if (name == "oracle") return estimator_kind::oracle;
  throw invalid_input("unknown estimator '" + name + "'");
}

int cmd_risk_sim(const opts& o) {
  std::ifstream f(o.input);
  if (!f) throw io_error("cannot open config: " + o.input);
  json cfg;
  try {
    cfg = json::parse(f);
  } catch (const nlohmann::json::exception& e) {
    throw io_error(o.input + ": " + e.what());
  }
  if (!cfg.is_object()) throw invalid_input(o.input + ": expected an object");
  reject_unknown_keys(cfg, {"seed", "reps", "p", "estimators", "scenarios"},
                      o.input);

  const std::uint64_t seed =
      o.seed_given ? o.seed : cfg.value("seed", o.seed);
  const std::size_t reps =
      o.reps ? o.reps : cfg.value("reps", std::uint64_t{1000});
  const double p = cfg.value("p", o.p);

  std::vector<estimator_kind> estimators{estimator_kind::lse};
  std::vector<std::string> estimator_names{"lse"};
  if (cfg.contains("estimators")) {
    estimators.clear();
    estimator_names.clear();
    for (const auto& e : cfg.at("estimators")) {
      estimator_names.push_back(e.get<std::string>());
      estimators.push_back(parse_estimator(estimator_names.back()));
    }
  }
  if (!cfg.contains("scenarios") || !cfg.at("scenarios").is_array() ||
      cfg.at("scenarios").empty())
    throw invalid_input(o.input + ": 'scenarios' must be a nonempty array");

  std::vector<scenario> scenarios;
  for (const auto& sj : cfg.at("scenarios")) {
    reject_unknown_keys(
        sj, {"id", "family", "truth", "n", "n1", "n2", "k", "v", "sigma", "law"},
        o.input + " scenario");
    scenario sc;
    sc.id = sj.at("id").get<std::string>();
    sc.family = parse_family(sj.at("family").get<std::string>());
    sc.truth = parse_truth(sj.at("truth").get<std::string>());
    sc.n = sj.value("n", std::uint64_t{0});
    sc.n1 = sj.value("n1", std::uint64_t{0});
    sc.n2 = sj.value("n2", std::uint64_t{0});
    sc.k = sj.value("k", std::uint64_t{1});
    sc.v = sj.value("v", 1.0);
    sc.sigma = sj.value("sigma", 1.0);
    sc.law = parse_law(sj.value("law", std::string("gaussian")));
    if (sc.family == shape_family::matrix) {
      if (sc.n1 == 0 || sc.n2 == 0)
        throw invalid_input("scenario '" + sc.id + "': matrix needs n1, n2");
    } else if (sc.n == 0) {
      throw invalid_input("scenario '" + sc.id + "': n is required");
    }
    scenarios.push_back(std::move(sc));
  }

  std::string csv = "scenario_id,family,estimator,n,sigma,p,reps,risk,se,seed\n";
  std::size_t row = 0;
  for (const auto& sc : scenarios) {
    const std::size_t total =
        sc.family == shape_family::matrix ? sc.n1 * sc.n2 : sc.n;
    for (std::size_t e = 0; e < estimators.size(); ++e) {
      const std::uint64_t row_seed = child_seed(seed, row++);
      risk_estimate r = mc_risk(sc, estimators[e], p, reps, row_seed);
      csv += sc.id;
      csv += ',';
      csv += family_name(sc.family);
      csv += ',';
      csv += estimator_names[e];
      csv += ',';
      csv += std::to_string(total);
      csv += ',';
      csv += fmt(sc.sigma);
      csv += ',';
      csv += fmt(p);
      csv += ',';
      csv += std::to_string(r.reps);
      csv += ',';
      csv += fmt(r.risk);
      csv += ',';
      csv += fmt(r.se);
      csv += ',';
      csv += std::to_string(row_seed);
      csv += '\n';
    }
  }
  write_text(o.out, csv);
  return 0;
}

int cmd_rate_slope(const opts& o) {
  csv_table t = read_csv(o.input);
  if (t.width != 2)
    throw invalid_input(o.input + ": expected two columns (n, risk)");
  std::vector<std::pair<double, double>> pts(t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i)
    pts[i] = {t.rows[i][0], t.rows[i][1]};
  double slope = rate_slope(pts);
  json j = header_json("rate-slope");
  j["points"] = pts.size();
  j["slope"] = slope;
  write_json(o, j);
  return 0;
}

int dispatch(const std::string& name, const opts& o) {
  if (name == "fit-iso") return cmd_fit_iso(o, false);
  if (name == "fit-unimodal") return cmd_fit_unimodal(o);
  if (name == "fit-convex") return cmd_fit_convex(o);
  if (name == "fit-kmono") return cmd_fit_kmono(o);
  if (name == "fit-matrix") return cmd_fit_matrix(o);
  if (name == "fit-po") return cmd_fit_po(o);
  if (name == "fit-additive") return cmd_fit_additive(o);
  if (name == "fit-sindex") return cmd_fit_sindex(o);
  if (name == "ci-bootstrap") return cmd_ci_bootstrap(o);
  if (name == "ci-lrs") return cmd_ci_lrs(o);
  if (name == "sim-chernoff") return cmd_sim_chernoff(o);
  if (name == "sim-lrs-null") return cmd_sim_lrs_null(o);
  if (name == "risk-sim") return cmd_risk_sim(o);
  if (name == "rate-slope") return cmd_rate_slope(o);
  throw invalid_input("unknown subcommand: " + name);
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"shape-restricted least squares toolkit"};
  app.require_subcommand(1);
  opts o;

  auto add_common = [&](CLI::App* sub, bool with_input = true) {
    if (with_input)
      sub->add_option("input", o.input, "input file")->required();
    sub->add_option("--out", o.out, "output path, - for stdout");
    sub->add_option("--seed", o.seed, "random seed");
    sub->add_option("--tol", o.tol, "solver tolerance override");
    return sub;
  };

  add_common(app.add_subcommand("fit-iso", "monotone least squares"));
  add_common(app.add_subcommand("fit-unimodal", "valley-shaped least squares"));
  add_common(app.add_subcommand("fit-convex", "convex least squares"));
  auto* kmono = add_common(
      app.add_subcommand("fit-kmono", "k-th order difference constraints"));
  kmono->add_option("--k", o.k, "difference order")->required();
  add_common(app.add_subcommand("fit-matrix", "two-way monotone least squares"));
  auto* po = add_common(
      app.add_subcommand("fit-po", "partial order restricted least squares"));
  po->add_option("--order", o.order,
                 "coordinatewise, weak-majorization, or explicit");
  po->add_option("--edges", o.edges, "edge list file for the explicit order");
  auto* addf = add_common(
      app.add_subcommand("fit-additive", "additive model with shape constraints"));
  addf->add_option("--shapes", o.shapes,
                   "comma list per coordinate: inc, dec, convex");
  auto* sindex = add_common(
      app.add_subcommand("fit-sindex", "monotone single index model"));
  sindex->add_option("--candidates", o.candidates, "direction grid size");
  sindex->add_option("--refine", o.refine, "pattern search passes");

  auto* cib = add_common(
      app.add_subcommand("ci-bootstrap", "bootstrap interval for f(t)"));
  cib->add_option("--t", o.t, "evaluation point")->required();
  cib->add_option("--alpha", o.alpha, "miscoverage level");
  cib->add_option("--reps", o.reps, "bootstrap replications");
  cib->add_option("--bandwidth", o.bandwidth, "smoothing bandwidth");
  cib->add_option("--scheme", o.scheme, "smoothed, naive_lse, or pairs");

  auto* cil = add_common(
      app.add_subcommand("ci-lrs", "likelihood ratio inversion interval"));
  cil->add_option("--t", o.t, "evaluation point")->required();
  cil->add_option("--alpha", o.alpha, "miscoverage level");
  cil->add_option("--reps", o.reps, "table replications when simulating");
  cil->add_option("--table-n", o.table_n, "table sample size when simulating");
  cil->add_option("--table", o.table, "load a saved null table");

  auto* simc = add_common(
      app.add_subcommand("sim-chernoff", "argmin location reference table"),
      false);
  simc->add_option("--reps", o.reps, "replications");
  simc->add_option("--grid-step", o.grid_step, "grid resolution");
  simc->add_option("--horizon", o.horizon, "walk horizon");
  simc->add_option("--table", o.table, "also save the binary table here");

  auto* siml = add_common(
      app.add_subcommand("sim-lrs-null", "pinned statistic reference table"),
      false);
  siml->add_option("--reps", o.reps, "replications");
  siml->add_option("--n", o.table_n, "sample size per replication");
  siml->add_option("--table", o.table, "also save the binary table here");

  auto* risk = add_common(
      app.add_subcommand("risk-sim", "Monte Carlo risk experiments"));
  risk->add_option("--reps", o.reps, "override config replications");

  add_common(app.add_subcommand("rate-slope", "log-log risk slope"));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  CLI::App* sub = app.get_subcommands().front();
  for (auto* s : app.get_subcommands())
    if (s->count("--seed")) o.seed_given = true;

  try {
    return dispatch(sub->get_name(), o);
  } catch (const degenerate_projection& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace shapereg::cli
