#pragma once

#include <map>
#include <string>

#include <json.hpp>

#include "linext/core/cell.hpp"
#include "linext/core/types.hpp"

namespace linext::metrics {

enum class JsdMode { Volume, Bev };

inline constexpr double kJsdResolution = 0.5;
inline constexpr double kIouResolutions[3] = {0.5, 0.2, 0.1};

/// Point counts per cell of a regular grid anchored at bounds.min. Points
/// outside the bounds land in the nearest boundary cell. In BEV mode the z
/// index is always 0.
struct OccupancyHistogram {
  double resolution = kJsdResolution;
  Bounds bounds;
  bool bev = false;
  std::map<Cell3, std::size_t> counts;
  std::size_t total = 0;

  static OccupancyHistogram build(const PointCloud& cloud, double resolution, const Bounds& bounds, bool bev);
  double probability(const Cell3& c) const;
};

/// Jensen-Shannon divergence with base-2 logs between the occupancy
/// distributions of two clouds; lies in [0, 1].
double jsd(const PointCloud& pred, const PointCloud& gt, JsdMode mode, const Bounds& bounds,
           double resolution = kJsdResolution);

/// |A n B| / |A u B| over the cell sets floor(p / r).
double voxel_iou(const PointCloud& pred, const PointCloud& gt, double r);

struct MetricsReport {
  double cd = 0.0;
  double jsd_3d = 0.0;
  double jsd_bev = 0.0;
  double iou_05 = 0.0;
  double iou_02 = 0.0;
  double iou_01 = 0.0;
  std::size_t pred_points = 0;
  std::size_t gt_points = 0;
  double seconds = 0.0;

  friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

MetricsReport evaluate(const PointCloud& pred, const PointCloud& gt, const Bounds& bounds);

void to_json(nlohmann::json& j, const MetricsReport& r);
void from_json(const nlohmann::json& j, MetricsReport& r);

/// CD, JSD 3D, JSD BEV, then IoU at 0.5, 0.2 and 0.1 m.
std::string csv_header();
std::string csv_row(const MetricsReport& r);

}  // namespace linext::metrics
