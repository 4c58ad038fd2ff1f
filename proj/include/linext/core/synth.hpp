#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "linext/core/types.hpp"

namespace linext {

struct BoxObstacle {
  Point3 center;
  Point3 size;  // full edge lengths
};

struct CylinderObstacle {
  Point3 base_center;  // center of the bottom disk
  double radius = 0.5;
  double height = 2.0;
};

/// Description of a synthetic street-like scene: a square ground plane with
/// axis-aligned boxes and vertical cylinders standing on it.
struct SceneSpec {
  double ground_half_extent = 20.0;
  double ground_z = -1.7;
  std::vector<BoxObstacle> boxes;
  std::vector<CylinderObstacle> cylinders;
  Point3 sensor_origin{0.0, 0.0, 0.0};
  double angular_resolution_deg = 1.0;
  double sample_spacing = 0.2;  // pitch of the dense surface sampling
  bool occlusion = true;
  std::size_t max_input_points = 0;  // 0 keeps every visible point
  std::size_t max_gt_points = 0;     // 0 keeps the full dense sampling

  /// Throws ValidationError on zero extents or non-positive sampling parameters.
  void validate() const;

  /// Ground plane plus a handful of boxes and poles.
  static SceneSpec default_street();
};

void to_json(nlohmann::json& j, const SceneSpec& s);
void from_json(const nlohmann::json& j, SceneSpec& s);

struct SyntheticScene {
  PointCloud input;
  PointCloud gt;
};

/// Samples every surface densely (gt), then keeps the points a single sensor
/// would see: points hidden behind an obstacle are dropped when occlusion is
/// on, and the remaining points are thinned with keep probability
/// min(1, (r0 / d)^2), r0 = sample_spacing / angular_resolution. That matches
/// a scanner whose beam footprint grows linearly with range, so the number of
/// returns per unit range on the ground falls off as 1/d.
SyntheticScene synth_scene(const SceneSpec& spec, std::uint64_t seed);

/// True when the segment from `origin` to `target` passes through an obstacle
/// before reaching `target`.
bool occluded(const SceneSpec& spec, Point3 origin, Point3 target);

}  // namespace linext
