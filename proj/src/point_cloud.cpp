#include "rbfshape/point_cloud.hpp"

#include "rbfshape/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace rbfshape {

namespace {

bool lex_less(const Point& a, const Point& b) {
  return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
}

}  // namespace

PointCloud::PointCloud(std::vector<Point> points, int dim) : points_(std::move(points)), dim_(dim) {
  if (dim_ != 1 && dim_ != 2) {
    throw InvalidArgument("point cloud dimension must be 1 or 2, got " + std::to_string(dim_));
  }
  if (points_.size() < 2) {
    throw DegenerateCloudError("point cloud needs at least 2 points");
  }
  for (const auto& p : points_) {
    if (!std::isfinite(p.x()) || !std::isfinite(p.y())) {
      throw InvalidArgument("point cloud contains a non-finite coordinate");
    }
    if (dim_ == 1 && p.y() != 0.0) {
      throw InvalidArgument("1D point cloud must have zero second coordinate");
    }
  }
  // Sort a copy to find exact duplicates in O(N log N).
  std::vector<Point> sorted = points_;
  std::sort(sorted.begin(), sorted.end(), lex_less);
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i] == sorted[i - 1]) {
      throw DegenerateCloudError("point cloud contains duplicate point (" +
                                 std::to_string(sorted[i].x()) + ", " +
                                 std::to_string(sorted[i].y()) + ")");
    }
  }
}

PointCloud PointCloud::from_1d(std::span<const double> xs) {
  std::vector<Point> pts;
  pts.reserve(xs.size());
  for (double x : xs) pts.emplace_back(x, 0.0);
  return PointCloud(std::move(pts), 1);
}

PointCloud PointCloud::from_2d(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) {
    throw InvalidArgument("from_2d: coordinate arrays differ in length");
  }
  std::vector<Point> pts;
  pts.reserve(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) pts.emplace_back(xs[i], ys[i]);
  return PointCloud(std::move(pts), 2);
}

PointCloud PointCloud::transformed(double scale, const Point& shift) const {
  std::vector<Point> pts;
  pts.reserve(points_.size());
  const Point s = dim_ == 1 ? Point(shift.x(), 0.0) : shift;
  for (const auto& p : points_) pts.push_back(scale * p + s);
  return PointCloud(std::move(pts), dim_);
}

PointCloud PointCloud::subset(std::span<const std::size_t> indices) const {
  std::vector<Point> pts;
  pts.reserve(indices.size());
  for (auto i : indices) pts.push_back(points_.at(i));
  return PointCloud(std::move(pts), dim_);
}

double PointCloud::min_pairwise_distance() const {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < points_.size(); ++i) {
    for (std::size_t j = i + 1; j < points_.size(); ++j) {
      best = std::min(best, (points_[i] - points_[j]).norm());
    }
  }
  return best;
}

PointCloud sort_cloud(const PointCloud& cloud) {
  std::vector<Point> pts = cloud.points();
  std::stable_sort(pts.begin(), pts.end(), lex_less);
  return PointCloud(std::move(pts), cloud.dim());
}

}  // namespace rbfshape
