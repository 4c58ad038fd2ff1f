#include "linext/spatial/fps.hpp"

#include <limits>

#include "linext/core/error.hpp"

namespace linext::spatial {

std::vector<std::size_t> fps(const PointCloud& cloud, std::size_t m, std::size_t start) {
  const std::size_t n = cloud.size();
  if (n == 0) throw ValidationError("fps: empty cloud");
  if (m == 0 || m > n) throw ValidationError("fps: requested " + std::to_string(m) + " of " + std::to_string(n) + " points");
  if (start >= n) throw ValidationError("fps: start index out of range");

  std::vector<std::size_t> picked;
  picked.reserve(m);
  std::vector<double> min_d2(n, std::numeric_limits<double>::infinity());
  std::size_t cur = start;
  for (std::size_t s = 0; s < m; ++s) {
    picked.push_back(cur);
    const Point3 c = cloud[cur];
    min_d2[cur] = -1.0;
    std::size_t best = n;
    double best_d2 = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (min_d2[i] < 0.0) continue;
      const double d2 = squared_distance(cloud[i], c);
      if (d2 < min_d2[i]) min_d2[i] = d2;
      if (min_d2[i] > best_d2) {
        best_d2 = min_d2[i];
        best = i;
      }
    }
    cur = best;
  }
  return picked;
}

}  // namespace linext::spatial
