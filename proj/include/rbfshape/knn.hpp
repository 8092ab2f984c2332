#pragma once

#include "rbfshape/point_cloud.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace rbfshape {

/// Static 2-d tree over a point set. Queries order neighbours by (distance, index),
/// so ties resolve to the lowest index.
class KdTree {
 public:
  explicit KdTree(std::span<const Point> points);

  std::vector<std::size_t> nearest(const Point& query, std::size_t k) const;
  std::size_t closest(const Point& query) const;
  std::size_t size() const noexcept { return points_.size(); }

 private:
  struct Node {
    std::size_t point;
    int axis;
    int left = -1;
    int right = -1;
  };

  int build(std::span<std::size_t> idx, int depth);

  std::vector<Point> points_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

}  // namespace rbfshape
