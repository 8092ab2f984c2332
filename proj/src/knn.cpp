#include "rbfshape/knn.hpp"

#include "rbfshape/errors.hpp"

#include <algorithm>
#include <numeric>
#include <queue>
#include <utility>

namespace rbfshape {

KdTree::KdTree(std::span<const Point> points) : points_(points.begin(), points.end()) {
  if (points_.empty()) throw InvalidArgument("KdTree: no points");
  nodes_.reserve(points_.size());
  std::vector<std::size_t> idx(points_.size());
  std::iota(idx.begin(), idx.end(), 0);
  root_ = build(idx, 0);
}

int KdTree::build(std::span<std::size_t> idx, int depth) {
  if (idx.empty()) return -1;
  const int axis = depth % 2;
  const std::size_t mid = idx.size() / 2;
  std::nth_element(idx.begin(), idx.begin() + static_cast<long>(mid), idx.end(),
                   [&](std::size_t a, std::size_t b) {
                     const double ka = points_[a][axis], kb = points_[b][axis];
                     return ka < kb || (ka == kb && a < b);
                   });
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back({idx[mid], axis});
  const int left = build(idx.first(mid), depth + 1);
  const int right = build(idx.subspan(mid + 1), depth + 1);
  nodes_[static_cast<std::size_t>(id)].left = left;
  nodes_[static_cast<std::size_t>(id)].right = right;
  return id;
}

std::vector<std::size_t> KdTree::nearest(const Point& query, std::size_t k) const {
  if (k == 0 || k > points_.size()) {
    throw InvalidArgument("KdTree::nearest: k must lie in [1, " + std::to_string(points_.size()) + "]");
  }
  using Entry = std::pair<double, std::size_t>;  // (squared distance, index), max-heap
  std::priority_queue<Entry> heap;

  // Near side first; the far side only when the split plane is within the current k-th distance.
  auto visit = [&](auto&& self, int node) -> void {
    if (node < 0) return;
    const Node& n = nodes_[static_cast<std::size_t>(node)];
    const Entry e{(points_[n.point] - query).squaredNorm(), n.point};
    if (heap.size() < k) {
      heap.push(e);
    } else if (e < heap.top()) {
      heap.pop();
      heap.push(e);
    }
    const double diff = query[n.axis] - points_[n.point][n.axis];
    const int near = diff < 0 ? n.left : n.right;
    const int far = diff < 0 ? n.right : n.left;
    self(self, near);
    if (heap.size() < k || diff * diff <= heap.top().first) self(self, far);
  };
  visit(visit, root_);

  std::vector<std::size_t> out(heap.size());
  for (std::size_t i = out.size(); i-- > 0;) {
    out[i] = heap.top().second;
    heap.pop();
  }
  return out;
}

std::size_t KdTree::closest(const Point& query) const { return nearest(query, 1).front(); }

}  // namespace rbfshape
