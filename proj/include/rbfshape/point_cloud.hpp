#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <span>
#include <vector>

namespace rbfshape {

/// Points are stored as 2-vectors; 1D clouds keep the second coordinate at zero.
using Point = Eigen::Vector2d;

/// Ordered set of N >= 2 pairwise distinct points in dimension 1 or 2.
class PointCloud {
 public:
  /// Throws DegenerateCloudError on duplicates or N < 2, InvalidArgument on bad dim.
  PointCloud(std::vector<Point> points, int dim);

  static PointCloud from_1d(std::span<const double> xs);
  static PointCloud from_2d(std::span<const double> xs, std::span<const double> ys);

  std::size_t size() const noexcept { return points_.size(); }
  int dim() const noexcept { return dim_; }
  const Point& operator[](std::size_t i) const { return points_[i]; }
  const std::vector<Point>& points() const noexcept { return points_; }

  auto begin() const noexcept { return points_.begin(); }
  auto end() const noexcept { return points_.end(); }

  /// Copy with every coordinate mapped to scale * x + shift.
  PointCloud transformed(double scale, const Point& shift) const;

  /// Sub-cloud picked by index; indices must be distinct.
  PointCloud subset(std::span<const std::size_t> indices) const;

  double min_pairwise_distance() const;

 private:
  std::vector<Point> points_;
  int dim_;
};

/// Ascending order in 1D, lexicographic (x, then y) in 2D. Idempotent.
PointCloud sort_cloud(const PointCloud& cloud);

}  // namespace rbfshape
