#include "linext/core/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "linext/core/downsample.hpp"
#include "linext/core/error.hpp"
#include "linext/core/rng.hpp"

namespace linext {

void SceneSpec::validate() const {
  auto fail = [](const std::string& what) { throw ValidationError("degenerate scene: " + what); };
  if (!(ground_half_extent > 0.0) || !std::isfinite(ground_half_extent)) fail("ground extent must be positive");
  if (!(sample_spacing > 0.0)) fail("sample spacing must be positive");
  if (!(angular_resolution_deg > 0.0)) fail("angular resolution must be positive");
  for (const auto& b : boxes) {
    if (!(b.size.x > 0.0 && b.size.y > 0.0 && b.size.z > 0.0)) fail("box with zero extent");
  }
  for (const auto& c : cylinders) {
    if (!(c.radius > 0.0 && c.height > 0.0)) fail("cylinder with zero extent");
  }
  if (!is_finite(sensor_origin)) fail("sensor origin must be finite");
}

SceneSpec SceneSpec::default_street() {
  SceneSpec s;
  s.boxes = {{{8.0, 3.0, -0.95}, {4.2, 1.8, 1.5}},
             {{-6.0, -4.0, -0.95}, {4.5, 1.9, 1.5}},
             {{3.0, -12.0, 1.3}, {10.0, 2.0, 6.0}}};
  s.cylinders = {{{5.0, -3.0, -1.7}, 0.3, 4.0}, {{-3.0, 6.0, -1.7}, 0.4, 5.0}, {{12.0, -6.0, -1.7}, 1.2, 3.0}};
  return s;
}

namespace {

nlohmann::json pj(Point3 p) { return nlohmann::json::array({p.x, p.y, p.z}); }
Point3 pf(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3) throw ValidationError("expected a 3-element array");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

}  // namespace

void to_json(nlohmann::json& j, const SceneSpec& s) {
  j = nlohmann::json{{"ground_half_extent", s.ground_half_extent},
                     {"ground_z", s.ground_z},
                     {"sensor_origin", pj(s.sensor_origin)},
                     {"angular_resolution_deg", s.angular_resolution_deg},
                     {"sample_spacing", s.sample_spacing},
                     {"occlusion", s.occlusion},
                     {"max_input_points", s.max_input_points},
                     {"max_gt_points", s.max_gt_points}};
  j["boxes"] = nlohmann::json::array();
  for (const auto& b : s.boxes) j["boxes"].push_back({{"center", pj(b.center)}, {"size", pj(b.size)}});
  j["cylinders"] = nlohmann::json::array();
  for (const auto& c : s.cylinders) {
    j["cylinders"].push_back({{"base_center", pj(c.base_center)}, {"radius", c.radius}, {"height", c.height}});
  }
}

void from_json(const nlohmann::json& j, SceneSpec& s) {
  try {
    s = SceneSpec{};
    if (j.contains("ground_half_extent")) j.at("ground_half_extent").get_to(s.ground_half_extent);
    if (j.contains("ground_z")) j.at("ground_z").get_to(s.ground_z);
    if (j.contains("sensor_origin")) s.sensor_origin = pf(j.at("sensor_origin"));
    if (j.contains("angular_resolution_deg")) j.at("angular_resolution_deg").get_to(s.angular_resolution_deg);
    if (j.contains("sample_spacing")) j.at("sample_spacing").get_to(s.sample_spacing);
    if (j.contains("occlusion")) j.at("occlusion").get_to(s.occlusion);
    if (j.contains("max_input_points")) j.at("max_input_points").get_to(s.max_input_points);
    if (j.contains("max_gt_points")) j.at("max_gt_points").get_to(s.max_gt_points);
    if (j.contains("boxes")) {
      for (const auto& b : j.at("boxes")) s.boxes.push_back({pf(b.at("center")), pf(b.at("size"))});
    }
    if (j.contains("cylinders")) {
      for (const auto& c : j.at("cylinders")) {
        s.cylinders.push_back({pf(c.at("base_center")), c.at("radius").get<double>(), c.at("height").get<double>()});
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed scene spec: ") + e.what());
  }
}

namespace {

// Entry/exit parameters of the line o + t*d through an axis-aligned box.
bool slab_interval(Point3 o, Point3 d, Point3 lo, Point3 hi, double& t0, double& t1) {
  t0 = -std::numeric_limits<double>::infinity();
  t1 = std::numeric_limits<double>::infinity();
  const double os[3] = {o.x, o.y, o.z};
  const double ds[3] = {d.x, d.y, d.z};
  const double los[3] = {lo.x, lo.y, lo.z};
  const double his[3] = {hi.x, hi.y, hi.z};
  for (int a = 0; a < 3; ++a) {
    if (std::abs(ds[a]) < 1e-300) {
      if (os[a] < los[a] || os[a] > his[a]) return false;
      continue;
    }
    double ta = (los[a] - os[a]) / ds[a];
    double tb = (his[a] - os[a]) / ds[a];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
  }
  return t0 <= t1;
}

bool cylinder_interval(Point3 o, Point3 d, const CylinderObstacle& c, double& t0, double& t1) {
  t0 = -std::numeric_limits<double>::infinity();
  t1 = std::numeric_limits<double>::infinity();
  const double ox = o.x - c.base_center.x;
  const double oy = o.y - c.base_center.y;
  const double a = d.x * d.x + d.y * d.y;
  const double r2 = c.radius * c.radius;
  if (a < 1e-300) {
    if (ox * ox + oy * oy > r2) return false;
  } else {
    const double b = ox * d.x + oy * d.y;
    const double cc = ox * ox + oy * oy - r2;
    const double disc = b * b - a * cc;
    if (disc < 0.0) return false;
    const double s = std::sqrt(disc);
    t0 = (-b - s) / a;
    t1 = (-b + s) / a;
  }
  const double zlo = c.base_center.z;
  const double zhi = c.base_center.z + c.height;
  if (std::abs(d.z) < 1e-300) {
    if (o.z < zlo || o.z > zhi) return false;
  } else {
    double ta = (zlo - o.z) / d.z;
    double tb = (zhi - o.z) / d.z;
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
  }
  return t0 <= t1;
}

}  // namespace

bool occluded(const SceneSpec& spec, Point3 origin, Point3 target) {
  const Point3 d = target - origin;
  const double len = norm(d);
  if (len == 0.0) return false;
  // Surface points sit exactly on their own obstacle; allow a few millimetres.
  const double t_stop = 1.0 - 1e-3 / len;
  auto blocks = [&](double t0, double t1) { return t1 > 1e-9 && t0 < t_stop; };
  double t0, t1;
  for (const auto& b : spec.boxes) {
    const Point3 half = b.size * 0.5;
    if (slab_interval(origin, d, b.center - half, b.center + half, t0, t1) && blocks(t0, t1)) return true;
  }
  for (const auto& c : spec.cylinders) {
    if (cylinder_interval(origin, d, c, t0, t1) && blocks(t0, t1)) return true;
  }
  return false;
}

namespace {

bool inside_footprint(const SceneSpec& spec, double x, double y) {
  for (const auto& b : spec.boxes) {
    if (std::abs(x - b.center.x) <= 0.5 * b.size.x && std::abs(y - b.center.y) <= 0.5 * b.size.y &&
        b.center.z - 0.5 * b.size.z <= spec.ground_z + 1e-9) {
      return true;
    }
  }
  for (const auto& c : spec.cylinders) {
    const double dx = x - c.base_center.x;
    const double dy = y - c.base_center.y;
    if (dx * dx + dy * dy <= c.radius * c.radius && c.base_center.z <= spec.ground_z + 1e-9) return true;
  }
  return false;
}

// Jittered grid over a rectangle spanned by `u` and `v` from `corner`.
void sample_rect(Point3 corner, Point3 u, Point3 v, double spacing, Rng& rng, std::vector<Point3>& out) {
  const double lu = norm(u);
  const double lv = norm(v);
  const auto nu = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(lu / spacing)));
  const auto nv = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(lv / spacing)));
  for (std::size_t a = 0; a < nu; ++a) {
    for (std::size_t b = 0; b < nv; ++b) {
      const double s = (static_cast<double>(a) + 0.5 + rng.uniform(-0.25, 0.25)) / static_cast<double>(nu);
      const double t = (static_cast<double>(b) + 0.5 + rng.uniform(-0.25, 0.25)) / static_cast<double>(nv);
      out.push_back(corner + u * s + v * t);
    }
  }
}

}  // namespace

SyntheticScene synth_scene(const SceneSpec& spec, std::uint64_t seed) {
  spec.validate();
  Rng jitter(derive_seed(seed, 1));
  std::vector<Point3> gt;
  const double s = spec.sample_spacing;

  // Ground.
  {
    const double e = spec.ground_half_extent;
    std::vector<Point3> ground;
    sample_rect({-e, -e, spec.ground_z}, {2 * e, 0, 0}, {0, 2 * e, 0}, s, jitter, ground);
    for (const auto& p : ground) {
      if (!inside_footprint(spec, p.x, p.y)) gt.push_back(p);
    }
  }
  // Boxes: every face but the bottom.
  for (const auto& b : spec.boxes) {
    const Point3 lo = b.center - b.size * 0.5;
    const Point3 sx{b.size.x, 0, 0}, sy{0, b.size.y, 0}, sz{0, 0, b.size.z};
    sample_rect(lo, sx, sz, s, jitter, gt);                  // y-min face
    sample_rect(lo + sy, sx, sz, s, jitter, gt);             // y-max face
    sample_rect(lo, sy, sz, s, jitter, gt);                  // x-min face
    sample_rect(lo + sx, sy, sz, s, jitter, gt);             // x-max face
    sample_rect(lo + sz, sx, sy, s, jitter, gt);             // top
  }
  // Cylinders: lateral surface and top cap.
  for (const auto& c : spec.cylinders) {
    const double circ = 2.0 * std::numbers::pi * c.radius;
    const auto na = std::max<std::size_t>(3, static_cast<std::size_t>(std::ceil(circ / s)));
    const auto nh = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(c.height / s)));
    for (std::size_t a = 0; a < na; ++a) {
      for (std::size_t h = 0; h < nh; ++h) {
        const double th = 2.0 * std::numbers::pi * (static_cast<double>(a) + 0.5 + jitter.uniform(-0.25, 0.25)) /
                          static_cast<double>(na);
        const double z = c.height * (static_cast<double>(h) + 0.5 + jitter.uniform(-0.25, 0.25)) /
                         static_cast<double>(nh);
        gt.push_back({c.base_center.x + c.radius * std::cos(th), c.base_center.y + c.radius * std::sin(th),
                      c.base_center.z + z});
      }
    }
    std::vector<Point3> cap;
    const Point3 corner{c.base_center.x - c.radius, c.base_center.y - c.radius, c.base_center.z + c.height};
    sample_rect(corner, {2 * c.radius, 0, 0}, {0, 2 * c.radius, 0}, s, jitter, cap);
    for (const auto& p : cap) {
      const double dx = p.x - c.base_center.x;
      const double dy = p.y - c.base_center.y;
      if (dx * dx + dy * dy <= c.radius * c.radius) gt.push_back(p);
    }
  }

  SyntheticScene scene;
  scene.gt = PointCloud(std::move(gt));

  Rng keep(derive_seed(seed, 2));
  const double r0 = s / (spec.angular_resolution_deg * std::numbers::pi / 180.0);
  std::vector<Point3> input;
  for (const auto& p : scene.gt) {
    const double u = keep.uniform();  // drawn for every point so visibility does not shift the stream
    if (spec.occlusion && occluded(spec, spec.sensor_origin, p)) continue;
    const double d = norm(p - spec.sensor_origin);
    const double prob = d <= r0 ? 1.0 : (r0 / d) * (r0 / d);
    if (u < prob) input.push_back(p);
  }
  scene.input = PointCloud(std::move(input));
  if (spec.max_input_points > 0) {
    scene.input = random_subsample(scene.input, spec.max_input_points, derive_seed(seed, 3));
  }
  if (spec.max_gt_points > 0 && scene.gt.size() > spec.max_gt_points) {
    scene.gt = voxel_downsample(scene.gt, spec.max_gt_points, derive_seed(seed, 4));
  }
  return scene;
}

}  // namespace linext
