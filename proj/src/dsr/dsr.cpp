#include "linext/dsr/dsr.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "linext/core/error.hpp"
#include "linext/core/rng.hpp"

namespace linext::dsr {

std::size_t DsrPlan::total_replicas() const {
  std::size_t n = 0;
  for (std::size_t g = 0; g < 4; ++g) n += (groups[g].second - groups[g].first) * counts[g];
  return n;
}

DsrPlan dsr_plan(const PointCloud& cloud, const std::array<std::size_t, 4>& counts) {
  if (cloud.empty()) throw ValidationError("dsr_plan: empty cloud");
  for (auto c : counts) {
    if (c == 0) throw ValidationError("dsr_plan: repeat counts must be positive");
  }
  const std::size_t n = cloud.size();
  std::vector<double> range(n);
  for (std::size_t i = 0; i < n; ++i) range[i] = norm(cloud[i]);

  DsrPlan plan;
  plan.counts = counts;
  plan.order.resize(n);
  std::iota(plan.order.begin(), plan.order.end(), 0);
  std::stable_sort(plan.order.begin(), plan.order.end(),
                   [&](std::size_t a, std::size_t b) { return range[a] < range[b]; });

  const std::size_t base = n / 4;
  const std::size_t extra = n % 4;
  std::size_t begin = 0;
  plan.factor.assign(n, 0);
  for (std::size_t g = 0; g < 4; ++g) {
    const std::size_t size = base + (g < extra ? 1 : 0);
    plan.groups[g] = {begin, begin + size};
    for (std::size_t r = begin; r < begin + size; ++r) plan.factor[plan.order[r]] = counts[g];
    begin += size;
  }
  return plan;
}

namespace {

Point3 jitter(Point3 p, double sigma, std::uint64_t seed, std::uint64_t replica) {
  if (sigma == 0.0) return p;
  Rng rng(derive_seed(seed, replica));
  std::normal_distribution<double> dist(0.0, sigma);
  const double dx = dist(rng);
  const double dy = dist(rng);
  const double dz = dist(rng);
  return {p.x + dx, p.y + dy, p.z + dz};
}

}  // namespace

PointCloud dsr_apply(const PointCloud& cloud, const DsrPlan& plan, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw ValidationError("dsr_apply: sigma must be >= 0");
  if (plan.order.size() != cloud.size()) throw ValidationError("dsr_apply: plan was built for another cloud");
  std::vector<Point3> out;
  out.reserve(plan.total_replicas());
  std::uint64_t replica = 0;
  for (std::size_t g = 0; g < 4; ++g) {
    for (std::size_t r = plan.groups[g].first; r < plan.groups[g].second; ++r) {
      const Point3 p = cloud[plan.order[r]];
      for (std::size_t c = 0; c < plan.counts[g]; ++c) out.push_back(jitter(p, sigma, seed, replica++));
    }
  }
  return PointCloud(std::move(out));
}

PointCloud uniform_repeat(const PointCloud& cloud, std::size_t factor, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw ValidationError("uniform_repeat: sigma must be >= 0");
  std::vector<Point3> out;
  out.reserve(cloud.size() * factor);
  std::uint64_t replica = 0;
  for (const auto& p : cloud) {
    for (std::size_t c = 0; c < factor; ++c) out.push_back(jitter(p, sigma, seed, replica++));
  }
  return PointCloud(std::move(out));
}

}  // namespace linext::dsr
