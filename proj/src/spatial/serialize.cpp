#include "linext/spatial/serialize.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>

#include "linext/core/error.hpp"
#include "linext/core/rng.hpp"
#include "linext/spatial/curves.hpp"

namespace linext::spatial {

std::string to_string(Curve c) {
  switch (c) {
    case Curve::Z: return "z";
    case Curve::Hilbert: return "hilbert";
    case Curve::Random: return "random";
  }
  return "?";
}

Curve parse_curve(const std::string& name) {
  std::string s = name;
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "z" || s == "zorder" || s == "morton") return Curve::Z;
  if (s == "hilbert") return Curve::Hilbert;
  if (s == "random") return Curve::Random;
  throw ValidationError("unknown curve '" + name + "' (expected z, hilbert or random)");
}

std::vector<std::size_t> SerialCode::ranks() const {
  std::vector<std::size_t> r(order.size());
  for (std::size_t pos = 0; pos < order.size(); ++pos) r[order[pos]] = pos;
  return r;
}

SerialCode serialize(const PointCloud& cloud, Curve curve, unsigned bits, const Bounds& bounds,
                     std::uint64_t seed) {
  if (bounds.degenerate()) throw ValidationError("serialize: bounds have zero extent");
  if (bits == 0 || bits > 21) throw ValidationError("serialize: bits must lie in [1, 21]");
  if (curve == Curve::Random) {
    Rng rng(seed);
    curve = rng.uniform() < 0.5 ? Curve::Z : Curve::Hilbert;
  }
  const double side = std::ldexp(1.0, static_cast<int>(bits));
  const auto max_cell = static_cast<std::uint32_t>(side) - 1;
  auto quantise = [&](double v, double lo, double hi) {
    const double t = std::floor((v - lo) / (hi - lo) * side);
    if (!(t > 0.0)) return std::uint32_t{0};
    if (t >= side) return max_cell;
    return static_cast<std::uint32_t>(t);
  };

  SerialCode sc;
  sc.curve = curve;
  sc.bits = bits;
  sc.codes.resize(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Point3 p = cloud[i];
    const CellCoord c{quantise(p.x, bounds.min.x, bounds.max.x), quantise(p.y, bounds.min.y, bounds.max.y),
                      quantise(p.z, bounds.min.z, bounds.max.z)};
    sc.codes[i] = curve == Curve::Z ? morton_encode(c, bits) : hilbert_encode(c, bits);
  }
  sc.order.resize(cloud.size());
  std::iota(sc.order.begin(), sc.order.end(), 0);
  std::stable_sort(sc.order.begin(), sc.order.end(),
                   [&](std::size_t a, std::size_t b) { return sc.codes[a] < sc.codes[b]; });
  return sc;
}

Bounds serial_bounds(const PointCloud& cloud) {
  Bounds b = Bounds::of(cloud);
  auto widen = [](double& lo, double& hi) {
    if (!(hi > lo)) {
      lo -= 0.5;
      hi += 0.5;
    }
  };
  widen(b.min.x, b.max.x);
  widen(b.min.y, b.max.y);
  widen(b.min.z, b.max.z);
  return b;
}

}  // namespace linext::spatial
