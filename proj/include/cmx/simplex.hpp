#pragma once

#include <algorithm>
#include <vector>

#include "cmx/types.hpp"

namespace cmx {

// Euclidean projection onto {y >= 0, sum(y) = 1} via sort-and-threshold.
inline Vec simplex_project(const Vec& v) {
  require_finite(v, "simplex_project");
  const Index n = v.size();
  std::vector<double> s(v.data(), v.data() + n);
  std::sort(s.begin(), s.end(), std::greater<double>());
  double cumsum = 0.0;
  double theta = 0.0;
  Index k = 0;
  for (Index i = 0; i < n; ++i) {
    cumsum += s[static_cast<std::size_t>(i)];
    const double t = (cumsum - 1.0) / static_cast<double>(i + 1);
    if (s[static_cast<std::size_t>(i)] - t > 0.0) {
      theta = t;
      k = i + 1;
    }
  }
  (void)k;
  return (v.array() - theta).cwiseMax(0.0);
}

}  // namespace cmx
