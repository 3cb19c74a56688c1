#pragma once

#include <vector>

#include "shapereg/cone.hpp"

// Exact projection onto an intersection of halfspaces by enumerating active
// subsets and solving the KKT system densely. Exponential in the number of
// rows: a cross-check for the real solvers on small problems, nothing more.
// Written against the textbook KKT conditions only, independent of the
// library's iterative machinery.
namespace oracle {

// one inequality a . theta <= b
struct halfspace {
  std::vector<double> a;
  double b = 0.0;
};

std::vector<double> project(const std::vector<double>& y,
                            const std::vector<halfspace>& rows);

// library cone (homogeneous rows, b = 0)
std::vector<double> project(const std::vector<double>& y,
                            const shapereg::cone_spec& cone);

}  // namespace oracle
