#pragma once

#include "rbfshape/point_cloud.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace rbfshape::gen {

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline double log_uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::exp(uniform(rng, std::log(lo), std::log(hi)));
}

// Uniform points on [0, scale]^dim, redrawn until every pair is at least min_sep * scale apart.
inline PointCloud random_cloud(std::mt19937_64& rng, int dim, int n, double scale = 1.0,
                               double min_sep = 1e-3) {
  for (;;) {
    std::vector<Point> pts;
    for (int i = 0; i < n; ++i) {
      pts.emplace_back(uniform(rng, 0.0, scale), dim == 2 ? uniform(rng, 0.0, scale) : 0.0);
    }
    bool ok = true;
    for (std::size_t i = 0; i < pts.size() && ok; ++i) {
      for (std::size_t j = 0; j < i && ok; ++j) ok = (pts[i] - pts[j]).norm() >= min_sep * scale;
    }
    if (ok) return PointCloud(std::move(pts), dim);
  }
}

inline PointCloud equidistant(int n, double lo = 0.0, double hi = 1.0) {
  std::vector<double> xs;
  for (int i = 0; i < n; ++i) xs.push_back(lo + (hi - lo) * i / (n - 1));
  return PointCloud::from_1d(xs);
}

inline double rel_diff(double a, double b) {
  const double s = std::max(std::abs(a), std::abs(b));
  return s == 0.0 ? 0.0 : std::abs(a - b) / s;
}

}  // namespace rbfshape::gen
