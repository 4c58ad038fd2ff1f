#pragma once

#include <span>
#include <vector>

#include "linext/core/types.hpp"
#include "linext/spatial/knn.hpp"

namespace linext::spatial {

/// Static k-d tree over a key cloud, median split on the widest axis.
/// Holds a reference to `keys`, which must outlive the tree.
class KdTree {
public:
  explicit KdTree(const PointCloud& keys);

  /// The k nearest keys of q under (squared distance, index) order, written
  /// to `out` nearest first.
  void query(Point3 q, std::size_t k, std::span<std::size_t> out) const;

private:
  struct Node {
    std::size_t begin = 0, end = 0;  // range of order_
    std::size_t left = 0, right = 0;  // children, 0 for a leaf
    int axis = 0;
    double split = 0.0;
    Point3 lo, hi;  // bounding box of the node's keys
  };

  std::size_t build(std::size_t begin, std::size_t end);

  const PointCloud& keys_;
  std::vector<std::size_t> order_;
  std::vector<Point3> sorted_;  // keys_ in order_ order
  std::vector<Node> nodes_;
};

/// Exact KNN through a KdTree; output identical to knn_bruteforce. Unlike
/// knn_grid its cost does not grow with the distance between queries and keys.
NeighborIndex knn_tree(const PointCloud& queries, const PointCloud& keys, std::size_t k);

}  // namespace linext::spatial
