#include "oracle_projection.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace oracle {

namespace {

// For each subset S of rows taken active: solve (A_S A_S^T) lambda = A_S y - b_S,
// set theta = y - A_S^T lambda, and accept when lambda >= 0 (dual feasibility)
// and A theta <= b (primal feasibility). The KKT conditions are sufficient for
// this strictly convex QP, so any accepted subset yields the projection.
std::vector<double> project_dense(const Eigen::VectorXd& y,
                                  const Eigen::MatrixXd& A,
                                  const Eigen::VectorXd& b) {
  const auto m = static_cast<unsigned>(A.rows());
  if (m > 25) throw std::runtime_error("oracle: too many rows to enumerate");
  const double scale = std::max(1.0, y.lpNorm<Eigen::Infinity>());
  const double tol = 1e-8 * scale;

  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m); ++mask) {
    std::vector<int> idx;
    for (unsigned r = 0; r < m; ++r)
      if (mask & (std::uint64_t{1} << r)) idx.push_back(static_cast<int>(r));

    Eigen::VectorXd theta;
    if (idx.empty()) {
      theta = y;
    } else {
      Eigen::MatrixXd As(idx.size(), A.cols());
      Eigen::VectorXd bs(idx.size());
      for (std::size_t r = 0; r < idx.size(); ++r) {
        As.row(static_cast<int>(r)) = A.row(idx[r]);
        bs(static_cast<int>(r)) = b(idx[r]);
      }
      Eigen::MatrixXd M = As * As.transpose();
      Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
      if (!lu.isInvertible()) continue;  // dependent rows; another subset covers this face
      Eigen::VectorXd lambda = lu.solve(As * y - bs);
      if ((lambda.array() < -tol).any()) continue;
      theta = y - As.transpose() * lambda;
    }
    if (((A * theta - b).array() > tol).any()) continue;
    return std::vector<double>(theta.data(), theta.data() + theta.size());
  }
  throw std::runtime_error("oracle: no KKT point found");
}

}  // namespace

std::vector<double> project(const std::vector<double>& y,
                            const std::vector<halfspace>& rows) {
  const auto n = static_cast<Eigen::Index>(y.size());
  Eigen::VectorXd yv = Eigen::Map<const Eigen::VectorXd>(y.data(), n);
  Eigen::MatrixXd A(rows.size(), n);
  Eigen::VectorXd b(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].a.size() != y.size())
      throw std::runtime_error("oracle: row dimension mismatch");
    A.row(static_cast<Eigen::Index>(r)) =
        Eigen::Map<const Eigen::VectorXd>(rows[r].a.data(), n);
    b(static_cast<Eigen::Index>(r)) = rows[r].b;
  }
  return project_dense(yv, A, b);
}

std::vector<double> project(const std::vector<double>& y,
                            const shapereg::cone_spec& cone) {
  std::vector<halfspace> rows(cone.rows.size());
  for (std::size_t r = 0; r < cone.rows.size(); ++r) {
    rows[r].a.assign(cone.n, 0.0);
    for (const auto& [i, v] : cone.rows[r].terms) rows[r].a[i] = v;
  }
  return project(y, rows);
}

}  // namespace oracle
