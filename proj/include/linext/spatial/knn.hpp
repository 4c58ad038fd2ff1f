#pragma once

#include <span>
#include <vector>

#include "linext/core/types.hpp"

namespace linext::spatial {

/// k key indices per query, flattened row-major (query-major).
///
/// Within a query's row distances are non-decreasing and equal distances are
/// ordered by ascending key index.
class NeighborIndex {
public:
  NeighborIndex() = default;
  NeighborIndex(std::size_t queries, std::size_t k) : k_(k), idx_(queries * k) {}

  std::size_t k() const { return k_; }
  std::size_t queries() const { return k_ == 0 ? 0 : idx_.size() / k_; }

  std::span<const std::size_t> row(std::size_t q) const { return {idx_.data() + q * k_, k_}; }
  std::span<std::size_t> row(std::size_t q) { return {idx_.data() + q * k_, k_}; }
  std::span<const std::size_t> flat() const { return idx_; }

  /// Throws ValidationError if any index is >= key_count.
  void validate(std::size_t key_count) const;

  friend bool operator==(const NeighborIndex&, const NeighborIndex&) = default;

private:
  std::size_t k_ = 0;
  std::vector<std::size_t> idx_;
};

NeighborIndex knn_bruteforce(const PointCloud& queries, const PointCloud& keys, std::size_t k);

/// Exact KNN over a uniform hash grid; output identical to knn_bruteforce.
NeighborIndex knn_grid(const PointCloud& queries, const PointCloud& keys, std::size_t k);

}  // namespace linext::spatial
