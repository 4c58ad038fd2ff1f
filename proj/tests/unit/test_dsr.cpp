#include <doctest.h>

#include <cmath>
#include <map>
#include <set>
#include <tuple>

#include "helpers.hpp"
#include "linext/core/error.hpp"
#include "linext/core/synth.hpp"
#include "linext/dsr/dsr.hpp"

using namespace linext;
using namespace linext::dsr;

namespace {

const std::array<std::size_t, 4> kCounts{5, 8, 12, 15};

// Coefficient of variation of point counts over 8 equal-width horizontal annuli in [0, r_max).
double annulus_cv(const PointCloud& c, double r_max) {
  std::array<double, 8> n{};
  for (const auto& p : c) {
    const double r = std::hypot(p.x, p.y);
    if (r < r_max) n[static_cast<std::size_t>(r / r_max * 8.0)] += 1.0;
  }
  double mean = 0.0;
  for (double v : n) mean += v / 8.0;
  double var = 0.0;
  for (double v : n) var += (v - mean) * (v - mean) / 8.0;
  return std::sqrt(var) / mean;
}

}  // namespace

TEST_CASE("dsr_plan: eight points at distances 1..8") {
  PointCloud c;
  for (int d : {5, 1, 8, 3, 2, 7, 4, 6}) c.push_back({0, static_cast<double>(d), 0});
  const auto plan = dsr_plan(c, kCounts);
  CHECK(plan.total_replicas() == 80);
  CHECK(plan.order == std::vector<std::size_t>{1, 4, 3, 6, 0, 7, 5, 2});
  for (std::size_t g = 0; g < 4; ++g) CHECK(plan.groups[g].second - plan.groups[g].first == 2);
  // factor by distance: 1,2 -> 5; 3,4 -> 8; 5,6 -> 12; 7,8 -> 15
  CHECK(plan.factor == std::vector<std::size_t>{12, 5, 15, 8, 5, 15, 8, 12});
}

TEST_CASE("dsr_plan: identical points and remainders") {
  PointCloud same;
  for (int i = 0; i < 4; ++i) same.push_back({1, 1, 1});
  const auto p4 = dsr_plan(same, kCounts);
  CHECK(p4.total_replicas() == 40);
  CHECK(p4.order == std::vector<std::size_t>{0, 1, 2, 3});

  PointCloud five;
  for (int i = 1; i <= 5; ++i) five.push_back({double(i), 0, 0});
  const auto p5 = dsr_plan(five, kCounts);
  std::array<std::size_t, 4> sizes{};
  for (std::size_t g = 0; g < 4; ++g) sizes[g] = p5.groups[g].second - p5.groups[g].first;
  CHECK(sizes == std::array<std::size_t, 4>{2, 1, 1, 1});
  CHECK(p5.total_replicas() == 2 * 5 + 8 + 12 + 15);

  CHECK_THROWS_AS(dsr_plan(PointCloud{}, kCounts), ValidationError);
}

TEST_CASE("dsr_apply: zero noise copies points") {
  const PointCloud one{{1.5, -2.0, 0.25}};
  const auto plan = dsr_plan(one, kCounts);
  const auto out = dsr_apply(one, plan, 0.0, 3);
  REQUIRE(out.size() == 5);
  for (const auto& p : out) CHECK(p == one[0]);

  const auto cloud = testutil::random_cloud(37, 4, -20, 20);
  const auto plan2 = dsr_plan(cloud, kCounts);
  const auto out2 = dsr_apply(cloud, plan2, 0.0, 1);
  CHECK(out2.size() == plan2.total_replicas());
  // replicas are contiguous, in plan order
  std::size_t pos = 0;
  for (auto i : plan2.order) {
    for (std::size_t r = 0; r < plan2.factor[i]; ++r) CHECK(out2[pos++] == cloud[i]);
  }
  using Key = std::tuple<double, double, double>;
  std::set<Key> a, b;
  for (const auto& p : cloud) a.insert({p.x, p.y, p.z});
  for (const auto& p : out2) b.insert({p.x, p.y, p.z});
  CHECK(a == b);
}

TEST_CASE("dsr_apply: noise statistics") {
  PointCloud origin;
  for (int i = 0; i < 1000; ++i) origin.push_back({0, 0, 0});
  // 1000 points x mean factor 10 = 10^4 replicas
  const auto plan = dsr_plan(origin, kCounts);
  const auto out = dsr_apply(origin, plan, 1.0, 2024);
  REQUIRE(out.size() == 10000);
  for (int axis = 0; axis < 3; ++axis) {
    double s = 0, s2 = 0;
    for (const auto& p : out) {
      const double v = axis == 0 ? p.x : axis == 1 ? p.y : p.z;
      s += v;
      s2 += v * v;
    }
    const double mean = s / out.size();
    const double sd = std::sqrt(s2 / out.size() - mean * mean);
    CHECK(std::abs(mean) < 0.05);
    CHECK(std::abs(sd - 1.0) < 0.05);
  }
}

TEST_CASE("dsr_apply: determinism and errors") {
  const auto cloud = testutil::random_cloud(100, 6, -30, 30);
  const auto plan = dsr_plan(cloud, kCounts);
  CHECK(dsr_apply(cloud, plan, 1.0, 9) == dsr_apply(cloud, plan, 1.0, 9));
  CHECK_FALSE(dsr_apply(cloud, plan, 1.0, 9) == dsr_apply(cloud, plan, 1.0, 10));
  CHECK_THROWS_AS(dsr_apply(cloud, plan, -0.1, 9), ValidationError);
  CHECK_THROWS_AS(dsr_apply(testutil::random_cloud(10, 1), plan, 1.0, 9), ValidationError);
}

TEST_CASE("dsr: count is ten times the input when 4 divides N") {
  for (std::size_t n : {4u, 8u, 400u, 2048u}) {
    const auto cloud = testutil::random_cloud(n, n, -40, 40);
    const auto plan = dsr_plan(cloud, kCounts);
    CHECK(plan.total_replicas() == 10 * n);
    CHECK(dsr_apply(cloud, plan, 1.0, 0).size() == 10 * n);
  }
}

TEST_CASE("dsr: flattens the radial density of a 1/d scene") {
  SceneSpec spec;
  spec.ground_half_extent = 30.0;
  spec.occlusion = false;
  // r0 = spacing / angle = 1 m: returns per unit range fall as 1/d from 1 m outwards
  spec.sample_spacing = 0.1;
  spec.angular_resolution_deg = 0.1 * 180.0 / M_PI;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto scene = synth_scene(spec, seed);
    const auto plan = dsr_plan(scene.input, kCounts);
    const auto d = dsr_apply(scene.input, plan, 1.0, seed);
    const auto u = uniform_repeat(scene.input, 10, 1.0, seed);
    CHECK(annulus_cv(d, 30.0) < annulus_cv(u, 30.0));
  }
}
