#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "shapereg/errors.hpp"

namespace shapereg {

// A univariate regression sample. x strictly increasing, |x| == |y| >= 1.
struct series {
  std::vector<double> x;
  std::vector<double> y;

  std::size_t size() const { return y.size(); }
};

inline void validate(const series& s) {
  if (s.y.empty()) throw empty_input("series: no observations");
  if (s.x.size() != s.y.size())
    throw dim_mismatch("series: x and y lengths differ");
  for (std::size_t i = 1; i < s.x.size(); ++i)
    if (!(s.x[i - 1] < s.x[i]))
      throw invalid_input("series: design points must be strictly increasing");
}

// y observed on the canonical grid x_i = (i+1)/n.
inline series on_grid(std::vector<double> y) {
  series s;
  const std::size_t n = y.size();
  s.x.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    s.x[i] = static_cast<double>(i + 1) / static_cast<double>(n);
  s.y = std::move(y);
  return s;
}

inline bool equispaced(const std::vector<double>& x, double rel_tol = 1e-9) {
  if (x.size() < 3) return true;
  const double d0 = (x.back() - x.front()) / static_cast<double>(x.size() - 1);
  for (std::size_t i = 1; i < x.size(); ++i) {
    double d = x[i] - x[i - 1];
    if (!(std::abs(d - d0) <= rel_tol * std::max(1.0, std::abs(d0))))
      return false;
  }
  return true;
}

}  // namespace shapereg
