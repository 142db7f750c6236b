#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

namespace enlarge {

inline double median_of(std::vector<double> v) {
  const size_t n = v.size();
  std::nth_element(v.begin(), v.begin() + n / 2, v.end());
  double hi = v[n / 2];
  if (n % 2 == 1) return hi;
  std::nth_element(v.begin(), v.begin() + n / 2 - 1, v.end());
  return 0.5 * (v[n / 2 - 1] + hi);
}

/// Median absolute deviation, without the normal-consistency factor.
inline double mad_of(const std::vector<double>& v) {
  const double med = median_of(v);
  std::vector<double> dev(v.size());
  for (size_t i = 0; i < v.size(); ++i) dev[i] = std::abs(v[i] - med);
  return median_of(dev);
}

}  // namespace enlarge
