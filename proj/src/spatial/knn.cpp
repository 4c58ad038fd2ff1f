#include "linext/spatial/knn.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <unordered_map>
#include <utility>

#include "linext/core/cell.hpp"
#include "linext/core/error.hpp"

namespace linext::spatial {

namespace {

using Cand = std::pair<double, std::size_t>;  // (squared distance, key index)

void check_args(const PointCloud& queries, const PointCloud& keys, std::size_t k) {
  if (k == 0) throw ValidationError("knn: k must be positive");
  if (k > keys.size()) {
    throw ValidationError("knn: k=" + std::to_string(k) + " exceeds key count " + std::to_string(keys.size()));
  }
  (void)queries;
}

void brute_row(Point3 q, const PointCloud& keys, std::size_t k, std::vector<Cand>& scratch,
               std::span<std::size_t> out) {
  scratch.resize(keys.size());
  for (std::size_t i = 0; i < keys.size(); ++i) scratch[i] = {squared_distance(q, keys[i]), i};
  std::partial_sort(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(k), scratch.end());
  for (std::size_t j = 0; j < k; ++j) out[j] = scratch[j].second;
}

}  // namespace

void NeighborIndex::validate(std::size_t key_count) const {
  for (auto i : idx_) {
    if (i >= key_count) throw ValidationError("neighbor index out of range");
  }
}

NeighborIndex knn_bruteforce(const PointCloud& queries, const PointCloud& keys, std::size_t k) {
  check_args(queries, keys, k);
  NeighborIndex out(queries.size(), k);
  std::vector<Cand> scratch;
  for (std::size_t q = 0; q < queries.size(); ++q) brute_row(queries[q], keys, k, scratch, out.row(q));
  return out;
}

namespace {

class KeyGrid {
public:
  KeyGrid(const PointCloud& keys, std::size_t k) : keys_(keys) {
    edge_ = estimate_edge(k);
    cells_.reserve(keys.size());
    lo_ = hi_ = cell_of(keys[0], edge_);
    for (std::size_t i = 0; i < keys.size(); ++i) {
      const Cell3 c = cell_of(keys[i], edge_);
      cells_[c].push_back(i);
      lo_ = {std::min(lo_.i, c.i), std::min(lo_.j, c.j), std::min(lo_.k, c.k)};
      hi_ = {std::max(hi_.i, c.i), std::max(hi_.j, c.j), std::max(hi_.k, c.k)};
    }
  }

  void query(Point3 q, std::size_t k, std::vector<Cand>& scratch, std::span<std::size_t> out) const {
    // Max-heap of the best k under (distance, index) ordering.
    std::priority_queue<Cand> heap;
    const Cell3 c = cell_of(q, edge_);
    // Distance from q to the boundary of its own cell bounds every key in ring r+1 from below.
    const double lo_x = static_cast<double>(c.i) * edge_, lo_y = static_cast<double>(c.j) * edge_,
                 lo_z = static_cast<double>(c.k) * edge_;
    const double margin = std::max(0.0, std::min({q.x - lo_x, lo_x + edge_ - q.x, q.y - lo_y, lo_y + edge_ - q.y,
                                                  q.z - lo_z, lo_z + edge_ - q.z}));
    auto visit = [&](const Cell3& cell) {
      auto it = cells_.find(cell);
      if (it == cells_.end()) return;
      for (auto i : it->second) {
        const Cand cand{squared_distance(q, keys_[i]), i};
        if (heap.size() < k) {
          heap.push(cand);
        } else if (cand < heap.top()) {
          heap.pop();
          heap.push(cand);
        }
      }
    };
    // Rings are clipped to the box of occupied cells; rings that miss it are skipped.
    auto gap = [](std::int64_t v, std::int64_t lo, std::int64_t hi) { return v < lo ? lo - v : (v > hi ? v - hi : 0); };
    auto reach = [](std::int64_t v, std::int64_t lo, std::int64_t hi) { return std::max(v - lo, hi - v); };
    const std::int64_t first =
        std::max({gap(c.i, lo_.i, hi_.i), gap(c.j, lo_.j, hi_.j), gap(c.k, lo_.k, hi_.k)});
    const std::int64_t last =
        std::max({reach(c.i, lo_.i, hi_.i), reach(c.j, lo_.j, hi_.j), reach(c.k, lo_.k, hi_.k)});
    std::size_t visited_cells = 0;
    for (std::int64_t r = first; r <= last; ++r) {
      const std::int64_t x0 = std::max(-r, lo_.i - c.i), x1 = std::min(r, hi_.i - c.i);
      const std::int64_t y0 = std::max(-r, lo_.j - c.j), y1 = std::min(r, hi_.j - c.j);
      const std::int64_t z0 = std::max(-r, lo_.k - c.k), z1 = std::min(r, hi_.k - c.k);
      const auto ring_cells = static_cast<std::size_t>((x1 - x0 + 1) * (y1 - y0 + 1) * (z1 - z0 + 1));
      if (visited_cells + ring_cells > 4 * cells_.size() + 64) {
        // Sparse neighbourhood: scanning every key is cheaper than more rings.
        brute_row(q, keys_, k, scratch, out);
        return;
      }
      for (std::int64_t dx = x0; dx <= x1; ++dx) {
        for (std::int64_t dy = y0; dy <= y1; ++dy) {
          if (dx == -r || dx == r || dy == -r || dy == r) {
            for (std::int64_t dz = z0; dz <= z1; ++dz) visit({c.i + dx, c.j + dy, c.k + dz});
          } else {
            if (-r >= z0) visit({c.i + dx, c.j + dy, c.k - r});
            if (r > 0 && r <= z1) visit({c.i + dx, c.j + dy, c.k + r});
          }
        }
      }
      visited_cells += ring_cells;
      if (heap.size() == k) {
        const double bound = (static_cast<double>(r) * edge_ + margin) * (1.0 - 1e-12);
        // Strict: an unseen key at exactly the bound could win the index tie-break.
        if (heap.top().first < bound * bound) break;
      }
    }
    for (std::size_t j = k; j-- > 0;) {
      out[j] = heap.top().second;
      heap.pop();
    }
  }

private:
  double estimate_edge(std::size_t k) const {
    const std::size_t n = keys_.size();
    const std::size_t samples = std::min<std::size_t>(n, 128);
    std::vector<double> nn;
    nn.reserve(samples);
    for (std::size_t s = 0; s < samples; ++s) {
      const std::size_t i = s * n / samples;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        const double d2 = squared_distance(keys_[i], keys_[j]);
        if (d2 > 0.0 && d2 < best) best = d2;
      }
      if (std::isfinite(best)) nn.push_back(std::sqrt(best));
    }
    double edge = 0.0;
    if (!nn.empty()) {
      std::nth_element(nn.begin(), nn.begin() + static_cast<std::ptrdiff_t>(nn.size() / 2), nn.end());
      edge = nn[nn.size() / 2] * std::cbrt(static_cast<double>(std::max<std::size_t>(k, 1)));
    }
    if (!(edge > 0.0) || !std::isfinite(edge)) edge = 1.0;  // all keys coincide
    return edge;
  }

  const PointCloud& keys_;
  double edge_ = 1.0;
  Cell3 lo_, hi_;  // box of occupied cells
  std::unordered_map<Cell3, std::vector<std::size_t>, Cell3Hash> cells_;
};

}  // namespace

NeighborIndex knn_grid(const PointCloud& queries, const PointCloud& keys, std::size_t k) {
  check_args(queries, keys, k);
  NeighborIndex out(queries.size(), k);
  if (queries.empty()) return out;
  KeyGrid grid(keys, k);
  std::vector<Cand> scratch;
  for (std::size_t q = 0; q < queries.size(); ++q) grid.query(queries[q], k, scratch, out.row(q));
  return out;
}

}  // namespace linext::spatial
