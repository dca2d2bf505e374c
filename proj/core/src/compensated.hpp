#pragma once

#include <cmath>
#include <vector>

namespace monolab {
namespace detail {

// Neumaier-compensated sum; keeps mass bookkeeping well below the
// tolerances the tests pin even after millions of updates.
inline double compensated_sum(const std::vector<double>& v) {
  double s = 0.0, c = 0.0;
  for (double x : v) {
    const double t = s + x;
    if (std::abs(s) >= std::abs(x)) {
      c += (s - t) + x;
    } else {
      c += (x - t) + s;
    }
    s = t;
  }
  return s + c;
}

// Streaming variant for accumulating one term at a time.
struct CompensatedAccumulator {
  double s = 0.0;
  double c = 0.0;

  void add(double x) {
    const double t = s + x;
    if (std::abs(s) >= std::abs(x)) {
      c += (s - t) + x;
    } else {
      c += (x - t) + s;
    }
    s = t;
  }

  double total() const { return s + c; }
};

}  // namespace detail
}  // namespace monolab
