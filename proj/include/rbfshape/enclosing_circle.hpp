#pragma once

#include "rbfshape/point_cloud.hpp"

#include <span>

namespace rbfshape {

struct Circle {
  Point center{0.0, 0.0};
  double radius = 0.0;

  bool contains(const Point& p, double rel_tol = 1e-12) const;
};

/// Smallest circle enclosing all points (Welzl's incremental algorithm, fixed-seed shuffle).
Circle minimal_enclosing_circle(std::span<const Point> points);

/// Diameter of the minimal enclosing circle; max - min for 1D clouds.
double enclosing_diameter(const PointCloud& cloud);

}  // namespace rbfshape
