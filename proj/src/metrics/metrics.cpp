#include "linext/metrics/metrics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <set>
#include <sstream>

#include "linext/core/error.hpp"
#include "linext/pipeline/chamfer.hpp"

namespace linext::metrics {

namespace {

std::int64_t clamped_index(double v, double lo, double hi, double r) {
  const auto cells = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil((hi - lo) / r)));
  const double f = std::floor((v - lo) / r);
  if (!(f >= 0.0)) return 0;  // also catches NaN
  if (f >= static_cast<double>(cells - 1)) return cells - 1;
  return static_cast<std::int64_t>(f);
}

void require_nonempty(const PointCloud& a, const PointCloud& b, const char* what) {
  if (a.empty() || b.empty()) throw ValidationError(std::string(what) + ": both clouds must be non-empty");
}

}  // namespace

OccupancyHistogram OccupancyHistogram::build(const PointCloud& cloud, double resolution, const Bounds& bounds,
                                             bool bev) {
  if (!(resolution > 0.0)) throw ValidationError("histogram: resolution must be positive");
  const bool flat = !(bounds.max.x > bounds.min.x && bounds.max.y > bounds.min.y);
  if (flat || (!bev && !(bounds.max.z > bounds.min.z))) throw ValidationError("histogram: degenerate bounds");
  OccupancyHistogram h;
  h.resolution = resolution;
  h.bounds = bounds;
  h.bev = bev;
  for (const auto& p : cloud) {
    const Cell3 c{clamped_index(p.x, bounds.min.x, bounds.max.x, resolution),
                  clamped_index(p.y, bounds.min.y, bounds.max.y, resolution),
                  bev ? 0 : clamped_index(p.z, bounds.min.z, bounds.max.z, resolution)};
    ++h.counts[c];
  }
  h.total = cloud.size();
  return h;
}

double OccupancyHistogram::probability(const Cell3& c) const {
  const auto it = counts.find(c);
  if (it == counts.end() || total == 0) return 0.0;
  return static_cast<double>(it->second) / static_cast<double>(total);
}

double jsd(const PointCloud& pred, const PointCloud& gt, JsdMode mode, const Bounds& bounds, double resolution) {
  require_nonempty(pred, gt, "jsd");
  const bool bev = mode == JsdMode::Bev;
  const auto hp = OccupancyHistogram::build(pred, resolution, bounds, bev);
  const auto hq = OccupancyHistogram::build(gt, resolution, bounds, bev);

  std::set<Cell3> support;
  for (const auto& [c, _] : hp.counts) support.insert(c);
  for (const auto& [c, _] : hq.counts) support.insert(c);

  // 0 * log(0 / m) contributes nothing.
  auto term = [](double p, double m) { return p > 0.0 ? p * std::log2(p / m) : 0.0; };
  double total = 0.0;
  for (const auto& c : support) {
    const double p = hp.probability(c), q = hq.probability(c);
    const double m = 0.5 * (p + q);
    total += 0.5 * term(p, m) + 0.5 * term(q, m);
  }
  return std::clamp(total, 0.0, 1.0);
}

double voxel_iou(const PointCloud& pred, const PointCloud& gt, double r) {
  if (!(r > 0.0)) throw ValidationError("voxel_iou: resolution must be positive");
  require_nonempty(pred, gt, "voxel_iou");
  std::set<Cell3> a, b;
  for (const auto& p : pred) a.insert(cell_of(p, r));
  for (const auto& p : gt) b.insert(cell_of(p, r));
  std::size_t inter = 0;
  for (const auto& c : a) inter += b.count(c);
  const std::size_t uni = a.size() + b.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

MetricsReport evaluate(const PointCloud& pred, const PointCloud& gt, const Bounds& bounds) {
  require_nonempty(pred, gt, "evaluate");
  pred.validate();
  gt.validate();
  const auto start = std::chrono::steady_clock::now();
  MetricsReport r;
  r.cd = pipeline::chamfer(pred, gt);
  r.jsd_3d = jsd(pred, gt, JsdMode::Volume, bounds);
  r.jsd_bev = jsd(pred, gt, JsdMode::Bev, bounds);
  r.iou_05 = voxel_iou(pred, gt, kIouResolutions[0]);
  r.iou_02 = voxel_iou(pred, gt, kIouResolutions[1]);
  r.iou_01 = voxel_iou(pred, gt, kIouResolutions[2]);
  r.pred_points = pred.size();
  r.gt_points = gt.size();
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

void to_json(nlohmann::json& j, const MetricsReport& r) {
  j = nlohmann::json{{"cd", r.cd},
                     {"jsd_3d", r.jsd_3d},
                     {"jsd_bev", r.jsd_bev},
                     {"iou_0.5", r.iou_05},
                     {"iou_0.2", r.iou_02},
                     {"iou_0.1", r.iou_01},
                     {"pred_points", r.pred_points},
                     {"gt_points", r.gt_points},
                     {"seconds", r.seconds}};
}

void from_json(const nlohmann::json& j, MetricsReport& r) {
  try {
    j.at("cd").get_to(r.cd);
    j.at("jsd_3d").get_to(r.jsd_3d);
    j.at("jsd_bev").get_to(r.jsd_bev);
    j.at("iou_0.5").get_to(r.iou_05);
    j.at("iou_0.2").get_to(r.iou_02);
    j.at("iou_0.1").get_to(r.iou_01);
    j.at("pred_points").get_to(r.pred_points);
    j.at("gt_points").get_to(r.gt_points);
    j.at("seconds").get_to(r.seconds);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed metrics report: ") + e.what());
  }
}

std::string csv_header() { return "cd,jsd_3d,jsd_bev,iou_0.5,iou_0.2,iou_0.1"; }

std::string csv_row(const MetricsReport& r) {
  std::ostringstream os;
  os << std::setprecision(17) << r.cd << ',' << r.jsd_3d << ',' << r.jsd_bev << ',' << r.iou_05 << ',' << r.iou_02
     << ',' << r.iou_01;
  return os.str();
}

}  // namespace linext::metrics
