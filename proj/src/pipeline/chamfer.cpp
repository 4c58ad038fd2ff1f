#include "linext/pipeline/chamfer.hpp"

#include <algorithm>
#include <limits>
#include <vector>

#include "linext/core/error.hpp"
#include "linext/spatial/kdtree.hpp"

namespace linext::pipeline {

namespace {

void require_nonempty(const PointCloud& p, const PointCloud& q) {
  if (p.empty() || q.empty()) throw ValidationError("chamfer: both clouds must be non-empty");
}

double sorted_mean(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double directed(const PointCloud& from, const PointCloud& to) {
  const auto nn = spatial::knn_tree(from, to, 1);
  std::vector<double> d(from.size());
  for (std::size_t i = 0; i < from.size(); ++i) d[i] = squared_distance(from[i], to[nn.row(i)[0]]);
  return sorted_mean(std::move(d));
}

double directed_brute(const PointCloud& from, const PointCloud& to) {
  std::vector<double> d(from.size(), std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < from.size(); ++i) {
    for (const auto& t : to) d[i] = std::min(d[i], squared_distance(from[i], t));
  }
  return sorted_mean(std::move(d));
}

}  // namespace

double chamfer(const PointCloud& p, const PointCloud& q) {
  require_nonempty(p, q);
  return directed(p, q) + directed(q, p);
}

double chamfer_bruteforce(const PointCloud& p, const PointCloud& q) {
  require_nonempty(p, q);
  return directed_brute(p, q) + directed_brute(q, p);
}

}  // namespace linext::pipeline
