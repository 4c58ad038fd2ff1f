#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "helpers.hpp"
#include "linext/core/error.hpp"
#include "linext/spatial/curves.hpp"
#include "linext/spatial/fps.hpp"
#include "linext/spatial/kdtree.hpp"
#include "linext/spatial/knn.hpp"
#include "linext/spatial/serialize.hpp"
#include "linext/spatial/voxel_grid.hpp"

using namespace linext;
using namespace linext::spatial;

namespace {

PointCloud line(int n) {
  PointCloud c;
  for (int i = 0; i < n; ++i) c.push_back({static_cast<double>(i), 0, 0});
  return c;
}

// Exhaustive greedy oracle: every candidate's min distance is recomputed from scratch.
std::vector<std::size_t> fps_oracle(const PointCloud& c, std::size_t m, std::size_t start) {
  std::vector<std::size_t> picked{start};
  while (picked.size() < m) {
    double best = -1.0;
    std::size_t arg = 0;
    for (std::size_t i = 0; i < c.size(); ++i) {
      if (std::find(picked.begin(), picked.end(), i) != picked.end()) continue;
      double dmin = INFINITY;
      for (auto j : picked) dmin = std::min(dmin, squared_distance(c[i], c[j]));
      if (dmin > best) {
        best = dmin;
        arg = i;
      }
    }
    picked.push_back(arg);
  }
  return picked;
}

// Sort-based oracle for the (d², index) rule.
NeighborIndex knn_oracle(const PointCloud& q, const PointCloud& keys, std::size_t k) {
  NeighborIndex out(q.size(), k);
  std::vector<std::size_t> ids(keys.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    std::iota(ids.begin(), ids.end(), 0);
    std::sort(ids.begin(), ids.end(), [&](std::size_t a, std::size_t b) {
      const double da = squared_distance(q[i], keys[a]), db = squared_distance(q[i], keys[b]);
      return da < db || (da == db && a < b);
    });
    std::copy_n(ids.begin(), k, out.row(i).begin());
  }
  return out;
}

int l1(CellCoord a, CellCoord b) {
  int s = 0;
  for (int i = 0; i < 3; ++i) s += std::abs(static_cast<int>(a[i]) - static_cast<int>(b[i]));
  return s;
}

}  // namespace

TEST_CASE("fps: examples") {
  const auto c = line(10);
  CHECK(fps(c, 2, 0) == std::vector<std::size_t>{0, 9});
  CHECK(fps(c, 3, 0) == std::vector<std::size_t>{0, 9, 4});
  const auto all = fps(c, 10, 3);
  CHECK(all.size() == 10);
  CHECK(all[0] == 3);
  CHECK(std::set<std::size_t>(all.begin(), all.end()).size() == 10);
  CHECK_THROWS_AS(fps(c, 11), ValidationError);
  CHECK_THROWS_AS(fps(PointCloud{}, 1), ValidationError);
}

TEST_CASE("fps: matches exhaustive oracle and invariants") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto c = testutil::random_cloud(60, seed);
    const std::size_t m = 1 + seed % 40;
    const auto got = fps(c, m, seed % 60);
    CHECK(got == fps_oracle(c, m, seed % 60));
    CHECK(std::set<std::size_t>(got.begin(), got.end()).size() == m);
    // the distance of each new pick to the earlier ones never grows
    double prev = INFINITY;
    for (std::size_t t = 1; t < got.size(); ++t) {
      double dmin = INFINITY;
      for (std::size_t s = 0; s < t; ++s) dmin = std::min(dmin, squared_distance(c[got[t]], c[got[s]]));
      CHECK(dmin <= prev);
      prev = dmin;
    }
  }
}

TEST_CASE("knn: hand examples") {
  const PointCloud keys{{1, 0, 0}, {2, 0, 0}, {3, 0, 0}};
  const PointCloud q{{0, 0, 0}};
  for (auto fn : {knn_bruteforce, knn_grid, knn_tree}) {
    const auto idx = fn(q, keys, 2);
    CHECK(std::vector<std::size_t>(idx.row(0).begin(), idx.row(0).end()) == std::vector<std::size_t>{0, 1});

    const auto self = fn(keys, keys, 1);
    for (std::size_t i = 0; i < 3; ++i) CHECK(self.row(i)[0] == i);

    const auto tie = fn(PointCloud{{0, 0, 0}}, PointCloud{{1, 0, 0}, {-1, 0, 0}}, 1);
    CHECK(tie.row(0)[0] == 0);

    PointCloud same;
    for (int i = 0; i < 6; ++i) same.push_back({2.5, 2.5, 2.5});
    const auto co = fn(same, same, 3);
    for (std::size_t i = 0; i < same.size(); ++i) {
      CHECK(std::vector<std::size_t>(co.row(i).begin(), co.row(i).end()) == std::vector<std::size_t>{0, 1, 2});
    }
    CHECK_THROWS_AS(fn(q, keys, 4), ValidationError);
  }
}

TEST_CASE("knn: brute force agrees with sort oracle") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto q = testutil::random_cloud(50, seed);
    const auto k = testutil::random_cloud(80, seed + 50);
    CHECK(knn_bruteforce(q, k, 7) == knn_oracle(q, k, 7));
  }
}

TEST_CASE("knn: grid and tree equal brute force") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    Rng rng(seed);
    const std::size_t nk = 20 + rng.index(500);
    const std::size_t k = 1 + rng.index(std::min<std::size_t>(nk, 20));
    PointCloud keys, queries;
    switch (seed % 4) {
      case 0:
        keys = testutil::random_cloud(nk, seed, -5, 5);
        queries = testutil::random_cloud(100, seed + 1000, -5, 5);
        break;
      case 1:  // planar keys, far queries
        for (std::size_t i = 0; i < nk; ++i) keys.push_back({rng.uniform(-20, 20), rng.uniform(-20, 20), -1.7});
        queries = testutil::random_cloud(100, seed + 1000, -60, 60);
        break;
      case 2:  // integer lattice: many exact distance ties
        for (std::size_t i = 0; i < nk; ++i) {
          keys.push_back({double(rng.index(5)), double(rng.index(5)), double(rng.index(5))});
        }
        for (int i = 0; i < 100; ++i) queries.push_back({double(rng.index(6)), double(rng.index(6)), 0.5});
        break;
      default:  // clustered
        for (std::size_t i = 0; i < nk; ++i) {
          const double cx = (i % 3) * 30.0;
          keys.push_back({cx + rng.normal(0, 0.1), rng.normal(0, 0.1), rng.normal(0, 0.1)});
        }
        queries = testutil::random_cloud(100, seed + 1000, -10, 70);
    }
    const auto ref = knn_bruteforce(queries, keys, k);
    CHECK(knn_grid(queries, keys, k) == ref);
    CHECK(knn_tree(queries, keys, k) == ref);
  }
}

TEST_CASE("knn: extreme spread stays exact") {
  Rng rng(3);
  PointCloud keys;
  for (int i = 0; i < 400; ++i) {
    const double scale = std::pow(10.0, rng.uniform(-2, 4));
    keys.push_back({rng.uniform(0, scale), rng.uniform(0, scale), rng.uniform(0, scale)});
  }
  const auto queries = testutil::random_cloud(200, 4, 0, 1e4);
  const auto ref = knn_bruteforce(queries, keys, 16);
  CHECK(knn_grid(queries, keys, 16) == ref);
  CHECK(knn_tree(queries, keys, 16) == ref);
  CHECK(knn_grid(keys, keys, 16) == knn_bruteforce(keys, keys, 16));
}

TEST_CASE("knn: rows are sorted and in range") {
  const auto keys = testutil::random_cloud(300, 8);
  const auto q = testutil::random_cloud(100, 9);
  const auto idx = knn_grid(q, keys, 10);
  CHECK_NOTHROW(idx.validate(keys.size()));
  for (std::size_t i = 0; i < q.size(); ++i) {
    const auto r = idx.row(i);
    for (std::size_t j = 1; j < r.size(); ++j) {
      const double a = squared_distance(q[i], keys[r[j - 1]]), b = squared_distance(q[i], keys[r[j]]);
      CHECK((a < b || (a == b && r[j - 1] < r[j])));
    }
  }
  CHECK_THROWS_AS(idx.validate(5), ValidationError);
}

TEST_CASE("morton: interleave convention") {
  CHECK(morton_encode({0, 0, 0}, 1) == 0);
  CHECK(morton_encode({1, 0, 0}, 1) == 1);
  CHECK(morton_encode({0, 1, 0}, 1) == 2);
  CHECK(morton_encode({0, 0, 1}, 1) == 4);
  CHECK(morton_encode({1, 1, 1}, 1) == 7);
  // bit 1 of u lands on code bit 3
  CHECK(morton_encode({2, 0, 0}, 2) == 8);
  CHECK_THROWS_AS(morton_encode({2, 0, 0}, 1), ValidationError);
  CHECK_THROWS_AS(morton_decode(8, 1), ValidationError);
  // the Z curve jumps: codes 1 and 2 are not neighbours
  CHECK(l1(morton_decode(1, 1), morton_decode(2, 1)) == 2);
}

TEST_CASE("curves: exhaustive round trip at b=5") {
  const unsigned b = 5;
  const std::uint32_t n = 1u << b;
  std::vector<bool> seen_m(std::size_t{1} << (3 * b)), seen_h(std::size_t{1} << (3 * b));
  for (std::uint32_t u = 0; u < n; ++u) {
    for (std::uint32_t v = 0; v < n; ++v) {
      for (std::uint32_t w = 0; w < n; ++w) {
        const CellCoord c{u, v, w};
        const auto m = morton_encode(c, b);
        const auto h = hilbert_encode(c, b);
        REQUIRE(m < seen_m.size());
        REQUIRE(h < seen_h.size());
        seen_m[m] = true;
        seen_h[h] = true;
        REQUIRE(morton_decode(m, b) == c);
        REQUIRE(hilbert_decode(h, b) == c);
      }
    }
  }
  CHECK(std::all_of(seen_m.begin(), seen_m.end(), [](bool x) { return x; }));
  CHECK(std::all_of(seen_h.begin(), seen_h.end(), [](bool x) { return x; }));
}

TEST_CASE("hilbert: unit steps for every b up to 5") {
  CHECK(hilbert_encode({0, 0, 0}, 3) == 0);
  for (unsigned b = 1; b <= 5; ++b) {
    const std::uint64_t total = std::uint64_t{1} << (3 * b);
    auto prev = hilbert_decode(0, b);
    for (std::uint64_t code = 1; code < total; ++code) {
      const auto cur = hilbert_decode(code, b);
      REQUIRE(l1(prev, cur) == 1);
      prev = cur;
    }
  }
}

TEST_CASE("serialize: unit cube corners follow the Morton sequence") {
  const PointCloud c{{1, 1, 1}, {0, 0, 0}, {1, 0, 1}, {0, 1, 0}, {1, 0, 0}, {0, 0, 1}, {1, 1, 0}, {0, 1, 1}};
  const Bounds b{{0, 0, 0}, {1, 1, 1}};
  const auto s = serialize(c, Curve::Z, 1, b, 0);
  CHECK(s.curve == Curve::Z);
  CHECK(s.codes == std::vector<std::uint64_t>{7, 0, 5, 2, 1, 4, 3, 6});
  CHECK(s.order == std::vector<std::size_t>{1, 4, 3, 6, 5, 2, 7, 0});
  const auto r = s.ranks();
  for (std::size_t i = 0; i < r.size(); ++i) CHECK(s.order[r[i]] == i);
}

TEST_CASE("serialize: single point, clamping, determinism, errors") {
  const Bounds b{{0, 0, 0}, {1, 1, 1}};
  CHECK(serialize(PointCloud{{0.3, 0.3, 0.3}}, Curve::Hilbert, 4, b, 1).order == std::vector<std::size_t>{0});

  const auto out = serialize(PointCloud{{-5, -5, -5}, {9, 9, 9}}, Curve::Z, 3, b, 0);
  CHECK(out.codes[0] == 0);
  CHECK(out.codes[1] == (std::uint64_t{1} << 9) - 1);

  const auto cloud = testutil::random_cloud(200, 5, 0, 1);
  bool saw_z = false, saw_h = false;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto a = serialize(cloud, Curve::Random, 6, b, seed);
    const auto a2 = serialize(cloud, Curve::Random, 6, b, seed);
    CHECK(a.order == a2.order);
    CHECK(a.curve == a2.curve);
    CHECK(a.curve != Curve::Random);
    saw_z |= a.curve == Curve::Z;
    saw_h |= a.curve == Curve::Hilbert;
    std::vector<std::size_t> sorted = a.order;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i) CHECK(sorted[i] == i);
    for (std::size_t i = 1; i < a.order.size(); ++i) {
      CHECK((a.codes[a.order[i - 1]] < a.codes[a.order[i]] ||
             (a.codes[a.order[i - 1]] == a.codes[a.order[i]] && a.order[i - 1] < a.order[i])));
    }
  }
  CHECK(saw_z);
  CHECK(saw_h);

  CHECK_THROWS_AS(serialize(cloud, Curve::Z, 4, Bounds{{0, 0, 0}, {1, 0, 1}}, 0), ValidationError);
  CHECK(parse_curve("Hilbert") == Curve::Hilbert);
  CHECK_THROWS_AS(parse_curve("peano"), ValidationError);

  const auto flat = serial_bounds(PointCloud{{0, 0, 2}, {1, 1, 2}});
  CHECK_FALSE(flat.degenerate());
}

TEST_CASE("voxelize: examples and conservation") {
  const Tensor f1({1, 2}, {3.0, -1.0});
  const auto g1 = voxelize(PointCloud{{7.3, -2.2, 0.1}}, f1, 0.37);
  CHECK(g1.layout.cell_count() == 1);
  CHECK(g1.features == f1);

  const Tensor f2({2, 2}, {1.0, 2.0, 3.0, 6.0});
  const auto same = voxelize(PointCloud{{0.1, 0, 0}, {0.4, 0, 0}}, f2, 0.5);
  REQUIRE(same.layout.cell_count() == 1);
  CHECK(same.features == Tensor({1, 2}, {2.0, 4.0}));
  CHECK(same.layout.members[0] == std::vector<std::size_t>{0, 1});

  const auto two = voxelize(PointCloud{{0.1, 0, 0}, {0.6, 0, 0}}, f2, 0.5);
  CHECK(two.layout.cell_count() == 2);
  CHECK(two.layout.cells[1] == Cell3{1, 0, 0});

  // negative coordinates floor downwards
  CHECK(voxel_layout(PointCloud{{-0.1, 0, 0}}, 0.5).cells[0] == Cell3{-1, 0, 0});

  const auto cloud = testutil::random_cloud(500, 2, -3, 3);
  const auto layout = voxel_layout(cloud, 0.7);
  std::size_t total = 0;
  for (std::size_t c = 0; c < layout.cell_count(); ++c) {
    total += layout.members[c].size();
    CHECK(std::is_sorted(layout.members[c].begin(), layout.members[c].end()));
    for (auto p : layout.members[c]) {
      CHECK(layout.point_cell[p] == c);
      CHECK(cell_of(cloud[p], 0.7) == layout.cells[c]);
    }
  }
  CHECK(total == cloud.size());

  CHECK_THROWS_AS(voxel_layout(cloud, 0.0), ValidationError);
  CHECK_THROWS_AS(voxelize(cloud, Tensor({3, 2}), 0.5), ValidationError);
}

TEST_CASE("rulebook: pairs are exactly the occupied neighbours") {
  const auto cloud = testutil::random_cloud(200, 12, 0, 3);
  const auto layout = voxel_layout(cloud, 0.5);
  const auto rb = build_rulebook(layout);
  CHECK(rb.cell_count == layout.cell_count());
  CHECK(kernel_offset(13) == std::array<std::int64_t, 3>{0, 0, 0});
  for (std::size_t o = 0; o < kKernelVolume; ++o) {
    const auto d = kernel_offset(o);
    std::size_t expected = 0;
    for (const auto& c : layout.cells) expected += layout.lookup.count(Cell3{c.i + d[0], c.j + d[1], c.k + d[2]});
    CHECK(rb.pairs[o].size() == expected);
  }
}
