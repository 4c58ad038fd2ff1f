#include "linext/spatial/kdtree.hpp"

#include <algorithm>
#include <numeric>
#include <utility>

#include "linext/core/error.hpp"

namespace linext::spatial {

namespace {

constexpr std::size_t kLeafSize = 12;

double coord(Point3 p, int axis) { return axis == 0 ? p.x : (axis == 1 ? p.y : p.z); }

// Squared distance from q to the box [lo, hi]; 0 inside.
double box_distance(Point3 q, Point3 lo, Point3 hi) {
  auto gap = [](double v, double a, double b) { return v < a ? a - v : (v > b ? v - b : 0.0); };
  const double dx = gap(q.x, lo.x, hi.x), dy = gap(q.y, lo.y, hi.y), dz = gap(q.z, lo.z, hi.z);
  return dx * dx + dy * dy + dz * dz;
}

}  // namespace

KdTree::KdTree(const PointCloud& keys) : keys_(keys), order_(keys.size()) {
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  nodes_.reserve(2 * keys.size() / kLeafSize + 2);
  if (!keys.empty()) build(0, keys.size());
  sorted_.reserve(keys.size());
  for (std::size_t i : order_) sorted_.push_back(keys[i]);
}

std::size_t KdTree::build(std::size_t begin, std::size_t end) {
  const std::size_t id = nodes_.size();
  Point3 lo = keys_[order_[begin]], hi = lo;
  for (std::size_t i = begin; i < end; ++i) {
    const Point3 p = keys_[order_[i]];
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
  }
  nodes_.push_back({begin, end, 0, 0, 0, 0.0, lo, hi});
  if (end - begin <= kLeafSize) return id;

  const double ex = hi.x - lo.x, ey = hi.y - lo.y, ez = hi.z - lo.z;
  const int axis = ex >= ey && ex >= ez ? 0 : (ey >= ez ? 1 : 2);
  if (std::max({ex, ey, ez}) == 0.0) return id;  // coincident keys stay in one leaf

  const std::size_t mid = begin + (end - begin) / 2;
  auto less = [&](std::size_t a, std::size_t b) { return coord(keys_[a], axis) < coord(keys_[b], axis); };
  std::nth_element(order_.begin() + static_cast<std::ptrdiff_t>(begin), order_.begin() + static_cast<std::ptrdiff_t>(mid),
                   order_.begin() + static_cast<std::ptrdiff_t>(end), less);
  const double split = coord(keys_[order_[mid]], axis);
  const std::size_t left = build(begin, mid);
  const std::size_t right = build(mid, end);
  Node& n = nodes_[id];
  n.left = left;
  n.right = right;
  n.axis = axis;
  n.split = split;
  return id;
}

void KdTree::query(Point3 q, std::size_t k, std::span<std::size_t> out) const {
  using Cand = std::pair<double, std::size_t>;
  // Best candidates so far, ascending by (distance, index).
  std::vector<Cand> best;
  best.reserve(k + 1);
  auto worse_than_kth = [&](const Cand& c) { return best.size() == k && !(c < best.back()); };

  // Left keys have coordinate <= split, right keys >= split. A tie at exactly
  // the bound can still win on index, so a node is pruned only when strictly
  // farther than the current k-th candidate.
  auto visit = [&](auto&& self, std::size_t id) -> void {
    const Node& n = nodes_[id];
    if (best.size() == k && box_distance(q, n.lo, n.hi) > best.back().first) return;
    if (n.left == 0) {
      for (std::size_t i = n.begin; i < n.end; ++i) {
        const Cand c{squared_distance(q, sorted_[i]), order_[i]};
        if (worse_than_kth(c)) continue;
        if (best.size() == k) best.pop_back();
        best.insert(std::upper_bound(best.begin(), best.end(), c), c);
      }
      return;
    }
    const double diff = coord(q, n.axis) - n.split;
    const std::size_t near = diff <= 0.0 ? n.left : n.right;
    const std::size_t far = diff <= 0.0 ? n.right : n.left;
    self(self, near);
    self(self, far);
  };
  visit(visit, 0);
  for (std::size_t j = 0; j < k; ++j) out[j] = best[j].second;
}

NeighborIndex knn_tree(const PointCloud& queries, const PointCloud& keys, std::size_t k) {
  if (k == 0) throw ValidationError("knn: k must be positive");
  if (k > keys.size()) {
    throw ValidationError("knn: k=" + std::to_string(k) + " exceeds key count " + std::to_string(keys.size()));
  }
  NeighborIndex out(queries.size(), k);
  const KdTree tree(keys);
  for (std::size_t q = 0; q < queries.size(); ++q) tree.query(queries[q], k, out.row(q));
  return out;
}

}  // namespace linext::spatial
