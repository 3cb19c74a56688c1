#pragma once

#include <stdexcept>
#include <string>

namespace shapereg {

// Base class for all failures raised by this library. Catching this (rather
// than std::exception) separates our contract violations from stdlib issues.
struct error : std::runtime_error {
  explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

#define SHAPEREG_DEFINE_ERROR(name)                          \
  struct name : error {                                      \
    explicit name(const std::string& msg) : error(msg) {}    \
  }

SHAPEREG_DEFINE_ERROR(empty_input);
SHAPEREG_DEFINE_ERROR(dim_mismatch);
SHAPEREG_DEFINE_ERROR(index_out_of_range);
SHAPEREG_DEFINE_ERROR(bad_order);
SHAPEREG_DEFINE_ERROR(out_of_domain);
SHAPEREG_DEFINE_ERROR(cyclic_order);
SHAPEREG_DEFINE_ERROR(degenerate_projection);
SHAPEREG_DEFINE_ERROR(bad_bandwidth);
SHAPEREG_DEFINE_ERROR(bad_evaluation_point);
SHAPEREG_DEFINE_ERROR(bad_level);
SHAPEREG_DEFINE_ERROR(too_few_replications);
SHAPEREG_DEFINE_ERROR(bad_grid);
SHAPEREG_DEFINE_ERROR(bad_partition);
SHAPEREG_DEFINE_ERROR(bad_exponent);
SHAPEREG_DEFINE_ERROR(too_few_points);
SHAPEREG_DEFINE_ERROR(family_mismatch);
SHAPEREG_DEFINE_ERROR(not_isotonic);
SHAPEREG_DEFINE_ERROR(invalid_input);
SHAPEREG_DEFINE_ERROR(io_error);

#undef SHAPEREG_DEFINE_ERROR

}  // namespace shapereg
