#pragma once

#include <cstddef>
#include <vector>

namespace shapereg {

// Compensated (Kahan) accumulator. Summation order is part of the output
// contract for anything seeded, so reductions must be sequential anyway;
// compensation buys back most of the rounding at no structural cost.
class kahan_sum {
 public:
  void add(double x) {
    double y = x - c_;
    double t = s_ + y;
    c_ = (t - s_) - y;
    s_ = t;
  }
  double value() const { return s_; }

 private:
  double s_ = 0.0;
  double c_ = 0.0;
};

inline double sum(const std::vector<double>& v) {
  kahan_sum acc;
  for (double x : v) acc.add(x);
  return acc.value();
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  kahan_sum acc;
  for (std::size_t i = 0; i < a.size(); ++i) acc.add(a[i] * b[i]);
  return acc.value();
}

inline double sum_squares(const std::vector<double>& v) {
  kahan_sum acc;
  for (double x : v) acc.add(x * x);
  return acc.value();
}

// sum of (a_i - b_i)^2
inline double sse_between(const std::vector<double>& a,
                          const std::vector<double>& b) {
  kahan_sum acc;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double r = a[i] - b[i];
    acc.add(r * r);
  }
  return acc.value();
}

}  // namespace shapereg
