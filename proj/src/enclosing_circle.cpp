#include "rbfshape/enclosing_circle.hpp"

#include "rbfshape/errors.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

namespace rbfshape {

bool Circle::contains(const Point& p, double rel_tol) const {
  return (p - center).norm() <= radius * (1.0 + rel_tol) + rel_tol;
}

namespace {

Circle from_two(const Point& a, const Point& b) {
  const Point c = 0.5 * (a + b);
  return {c, std::max((a - c).norm(), (b - c).norm())};
}

Circle from_three(const Point& a, const Point& b, const Point& c) {
  // Circumcircle, computed relative to a for stability.
  const double bx = b.x() - a.x(), by = b.y() - a.y();
  const double cx = c.x() - a.x(), cy = c.y() - a.y();
  const double d = 2.0 * (bx * cy - by * cx);
  if (d == 0.0) {
    // Collinear: the widest pair spans the circle.
    Circle best = from_two(a, b);
    for (const Circle& cand : {from_two(a, c), from_two(b, c)}) {
      if (cand.radius > best.radius) best = cand;
    }
    return best;
  }
  const double b2 = bx * bx + by * by;
  const double c2 = cx * cx + cy * cy;
  const Point center(a.x() + (cy * b2 - by * c2) / d, a.y() + (bx * c2 - cx * b2) / d);
  const double r = std::max({(a - center).norm(), (b - center).norm(), (c - center).norm()});
  return {center, r};
}

}  // namespace

Circle minimal_enclosing_circle(std::span<const Point> input) {
  if (input.empty()) throw InvalidArgument("minimal_enclosing_circle: no points");
  std::vector<Point> pts(input.begin(), input.end());
  std::mt19937 rng(0x5eed);
  std::shuffle(pts.begin(), pts.end(), rng);

  Circle c{pts[0], 0.0};
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (c.contains(pts[i])) continue;
    c = {pts[i], 0.0};
    for (std::size_t j = 0; j < i; ++j) {
      if (c.contains(pts[j])) continue;
      c = from_two(pts[i], pts[j]);
      for (std::size_t k = 0; k < j; ++k) {
        if (c.contains(pts[k])) continue;
        c = from_three(pts[i], pts[j], pts[k]);
      }
    }
  }
  return c;
}

double enclosing_diameter(const PointCloud& cloud) {
  if (cloud.dim() == 1) {
    double lo = cloud[0].x();
    double hi = lo;
    for (const auto& p : cloud) {
      lo = std::min(lo, p.x());
      hi = std::max(hi, p.x());
    }
    return hi - lo;
  }
  return 2.0 * minimal_enclosing_circle(cloud.points()).radius;
}

}  // namespace rbfshape
