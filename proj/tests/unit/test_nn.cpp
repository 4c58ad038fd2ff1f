#include <doctest.h>

#include <cmath>

#include "grad_cases.hpp"
#include "helpers.hpp"
#include "linext/core/error.hpp"
#include "linext/nn/adam.hpp"
#include "linext/nn/grad_check.hpp"
#include "linext/nn/mlp.hpp"
#include "linext/nn/ops.hpp"
#include "linext/nn/tape.hpp"

using namespace linext;
using namespace linext::nn;

namespace {

double dot(const Tensor& a, const Tensor& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void check_close(const Tensor& a, const Tensor& b, double tol) {
  REQUIRE(a.shape() == b.shape());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(0).scale(1).epsilon(tol));
}

}  // namespace

TEST_CASE("mlp_forward: examples") {
  ParamStore store;
  Parameter& w = store.add("w", Tensor({2, 2}, {1, 0, 0, 1}));
  Parameter& b = store.add("b", Tensor({2}, {1, 1}));
  Tape tape;
  std::vector<Parameter*> layers{&w, &b};
  const auto y = mlp_forward(tape.constant(Tensor({1, 2}, {1, 2})), layers);
  CHECK(y.value() == Tensor({1, 2}, {2, 3}));

  b.value.fill(0.0);
  const auto x = testutil::random_tensor({4, 2}, 1);
  Tape fresh;  // a tape snapshots parameter values, so the changed bias needs a new one
  CHECK(mlp_forward(fresh.constant(x), layers).value() == x);

  Rng rng(2);
  Mlp mlp(store, "deep", {3, 5, 2}, rng);
  mlp.weight(1).value.fill(0.0);
  const auto z = mlp.forward(tape.constant(testutil::random_tensor({6, 3}, 3)));
  for (double v : z.value().data()) CHECK(v == 0.0);

  // a hidden ReLU is applied between layers only
  ParamStore s2;
  Parameter& w1 = s2.add("w1", Tensor({1, 1}, {1}));
  Parameter& b1 = s2.add("b1", Tensor({1}, {0}));
  Parameter& w2 = s2.add("w2", Tensor({1, 1}, {-1}));
  Parameter& b2 = s2.add("b2", Tensor({1}, {0}));
  std::vector<Parameter*> two{&w1, &b1, &w2, &b2};
  CHECK(mlp_forward(tape.constant(Tensor({2, 1}, {-3, 3})), two).value() == Tensor({2, 1}, {0, -3}));

  Parameter& bad = store.add("bad", Tensor({3, 2}));
  std::vector<Parameter*> wrong{&bad, &b};
  CHECK_THROWS_AS(mlp_forward(tape.constant(x), wrong), ValidationError);
}

TEST_CASE("softmax: examples and invariants") {
  Tape tape;
  auto sm = [&](Tensor t, std::size_t axis) { return softmax(tape.constant(std::move(t)), axis).value(); };
  const auto a = sm(Tensor({1, 2}, {0, 0}), 1);
  CHECK(a[0] == 0.5);
  CHECK(a[1] == 0.5);
  const auto b = sm(Tensor({1, 2}, {std::log(1.0), std::log(3.0)}), 1);
  CHECK(b[0] == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(b[1] == doctest::Approx(0.75).epsilon(1e-15));
  const auto c = sm(Tensor({1, 2}, {1000, 1000}), 1);
  CHECK(c[0] == 0.5);
  CHECK(c[1] == 0.5);

  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto x = testutil::random_tensor({3, 5, 4}, seed, -20, 20);
    for (std::size_t axis = 0; axis < 3; ++axis) {
      const auto y = sm(x, axis);
      Tensor shifted = x;
      for (auto& v : shifted.data()) v += 123.456;
      const auto ys = sm(shifted, axis);
      for (std::size_t i = 0; i < y.size(); ++i) CHECK(std::abs(y[i] - ys[i]) <= 1e-12);
      // sums along the axis
      const auto& sh = x.shape();
      for (std::size_t i = 0; i < sh[0]; ++i) {
        for (std::size_t j = 0; j < sh[1]; ++j) {
          for (std::size_t k = 0; k < sh[2]; ++k) {
            if ((axis == 0 && i) || (axis == 1 && j) || (axis == 2 && k)) continue;
            double s = 0;
            for (std::size_t t = 0; t < sh[axis]; ++t) {
              s += y.at(axis == 0 ? t : i, axis == 1 ? t : j, axis == 2 ? t : k);
            }
            CHECK(std::abs(s - 1.0) <= 1e-12);
          }
        }
      }
    }
  }
}

TEST_CASE("gather_neighbors: examples") {
  Tape tape;
  const auto src = testutil::random_tensor({5, 3}, 4);
  spatial::NeighborIndex zeros(4, 3);
  const auto z = gather_neighbors(tape.constant(src), zeros).value();
  CHECK(z.shape() == std::vector<std::size_t>{4, 3, 3});
  for (std::size_t q = 0; q < 4; ++q)
    for (std::size_t c = 0; c < 3; ++c)
      for (std::size_t j = 0; j < 3; ++j) CHECK(z.at(q, c, j) == src.at(0, c));

  spatial::NeighborIndex ident(5, 1);
  for (std::size_t q = 0; q < 5; ++q) ident.row(q)[0] = q;
  const auto id = gather_neighbors(tape.constant(src), ident).value();
  for (std::size_t q = 0; q < 5; ++q)
    for (std::size_t c = 0; c < 3; ++c) CHECK(id.at(q, c, 0) == src.at(q, c));

  // hand-assembled: rows [4, 1] for query 0, [2, 2] for query 1
  const Tensor s2({5, 3}, {0, 1, 2, 10, 11, 12, 20, 21, 22, 30, 31, 32, 40, 41, 42});
  spatial::NeighborIndex idx(2, 2);
  idx.row(0)[0] = 4;
  idx.row(0)[1] = 1;
  idx.row(1)[0] = 2;
  idx.row(1)[1] = 2;
  const Tensor expected({2, 3, 2}, {40, 10, 41, 11, 42, 12, 20, 20, 21, 21, 22, 22});
  CHECK(gather_neighbors(tape.constant(s2), idx).value() == expected);

  spatial::NeighborIndex bad(1, 1);
  bad.row(0)[0] = 5;
  CHECK_THROWS_AS(gather_neighbors(tape.constant(src), bad), ValidationError);
}

TEST_CASE("gather and scatter are adjoint") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const auto idx = gradcases::random_index(7, 4, 6, rng);
    const auto u = testutil::random_tensor({6, 3}, seed + 1);
    const auto v = testutil::random_tensor({7, 3, 4}, seed + 2);
    Tape tape;
    Var uu = tape.input(u);
    Var g = gather_neighbors(uu, idx);
    Var s = weighted_sum(g, v);
    tape.backward(s);
    // <gather(u), v> against <u, scatter(v)>, where scatter(v) is the backward of the gather
    CHECK(std::abs(dot(g.value(), v) - dot(u, tape.grad(uu))) <= 1e-10);

    std::vector<std::size_t> rows(9);
    for (auto& r : rows) r = rng.index(6);
    const auto w = testutil::random_tensor({9, 3}, seed + 3);
    Tape t2;
    Var u2 = t2.input(u);
    Var gr = gather_rows(u2, rows);
    t2.backward(weighted_sum(gr, w));
    CHECK(std::abs(dot(gr.value(), w) - dot(u, t2.grad(u2))) <= 1e-10);
  }
}

TEST_CASE("ssmp: examples") {
  Tape tape;
  const auto a = ssmp(tape.constant(Tensor({1, 1, 4}, {3, 1, 4, 2})), 2).value();
  CHECK(a == Tensor({1, 1, 2}, {3, 4}));
  const auto x = testutil::random_tensor({2, 3, 4}, 1);
  CHECK(ssmp(tape.constant(x), 4).value() == x);
  CHECK_THROWS_AS(ssmp(tape.constant(x), 3), ValidationError);

  const auto r = testutil::random_tensor({4, 3, 8}, 5);
  const auto y = ssmp(tape.constant(r), 4).value();
  for (std::size_t n = 0; n < 4; ++n)
    for (std::size_t c = 0; c < 3; ++c)
      for (std::size_t s = 0; s < 4; ++s) CHECK(y.at(n, c, s) == std::max(r.at(n, c, 2 * s), r.at(n, c, 2 * s + 1)));
}

TEST_CASE("ssmp: tie gradient goes to the first maximum") {
  Tape tape;
  Var x = tape.input(Tensor({1, 1, 4}, {5, 5, 1, 5}));
  tape.backward(sum(ssmp(x, 1)));
  CHECK(tape.grad(x) == Tensor({1, 1, 4}, {1, 0, 0, 0}));
}

TEST_CASE("relative_max_pool equals the unfused segment max") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const std::size_t m = 1 + rng.index(6), k = 8, n = 3 + rng.index(8), c = 1 + rng.index(5);
    const std::size_t segs = std::size_t{1} << rng.index(4);
    const auto idx = gradcases::random_index(m, k, n, rng);
    const auto alpha = testutil::random_tensor({m * k, c}, seed + 10);
    const auto key = testutil::random_tensor({n, c}, seed + 11);
    const auto gw = testutil::random_tensor({m * segs, c}, seed + 12);

    Tape fused;
    Var fa = fused.input(alpha), fk = fused.input(key);
    Var fo = relative_max_pool(fa, fk, idx, segs);
    fused.backward(weighted_sum(fo, gw));

    Tape ref;
    Var ra = ref.input(alpha), rk = ref.input(key);
    Var rel = sub(swap_last_axes(reshape(ra, {m, k, c})), gather_neighbors(rk, idx));
    Var ro = reshape(swap_last_axes(ssmp(rel, segs)), {m * segs, c});
    ref.backward(weighted_sum(ro, gw));

    CHECK(fo.value() == ro.value());
    CHECK(fused.grad(fa) == ref.grad(ra));
    check_close(fused.grad(fk), ref.grad(rk), 1e-14);
  }
}

TEST_CASE("grad_check: examples") {
  ParamStore store;
  Parameter& x = store.add("x", testutil::random_tensor({2, 5}, 8));
  const auto constant = grad_check([&](Tape& t) { return sum(softmax(t.param(x), 1)); }, {&x});
  CHECK(constant.passed);
  CHECK(constant.max_rel_error <= 1e-8);
  CHECK(constant.checked == 10);

  Rng rng(3);
  ParamStore s2;
  Mlp mlp(s2, "m", {4, 4, 2}, rng);
  Parameter& in = s2.add("in", testutil::random_tensor({3, 4}, 9));
  const auto r = grad_check([&](Tape& t) { return sum(mlp.forward(t.param(in))); }, s2.all());
  CHECK(r.passed);
  CHECK(r.max_rel_error <= 1e-4);

  ParamStore s3;
  Parameter& d = s3.add("d", gradcases::separated_tensor({2, 2, 8}, rng));
  CHECK(grad_check([&](Tape& t) { return sum(ssmp(t.param(d), 4)); }, {&d}).passed);

  // a deliberately wrong backward is caught
  ParamStore s4;
  Parameter& p = s4.add("p", Tensor({3}, {0.5, -1.0, 2.0}));
  const auto broken = grad_check(
      [&](Tape& t) {
        Var v = t.param(p);
        Tensor out = v.value();
        for (auto& e : out.data()) e = e * e;
        const auto id = v.id();
        Var y = t.record(std::move(out), {v}, [id](Tape& tp, std::size_t self) {
          if (Tensor* g = tp.grad_slot(id)) {
            for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += tp.out_grad(self)[i];
          }
        });
        return sum(y);
      },
      {&p});
  CHECK_FALSE(broken.passed);
}

TEST_CASE("grad_check: kink crossings are counted, not hidden") {
  ParamStore store;
  // relu kink at 0 lies inside the +-h window of the first coordinate only
  Parameter& x = store.add("x", Tensor({3}, {4e-6, 0.5, -0.5}));
  const auto r = grad_check([&](Tape& t) { return sum(relu(t.param(x))); }, {&x});
  CHECK(r.kink_crossings == 1);
  CHECK(r.checked == 3);
  CHECK_FALSE(r.passed);  // the straddling difference still counts
  CHECK(r.worst_index == 0);

  Parameter& y = store.add("y", Tensor({2}, {0.3, -0.7}));
  const auto smooth = grad_check([&](Tape& t) { return sum(relu(t.param(y))); }, {&y});
  CHECK(smooth.kink_crossings == 0);
  CHECK(smooth.passed);

  // nearest-neighbour switch of the Chamfer loss: 0.5 is equidistant from 0 and 1
  Parameter& p = store.add("p", Tensor({1, 3}, {0.5 + 2e-6, 0, 0}));
  const PointCloud target{{0, 0, 0}, {1, 0, 0}};
  CHECK(grad_check([&](Tape& t) { return chamfer_loss(t.param(p), target); }, {&p}).kink_crossings == 1);

  Tape plain;
  relu(plain.constant(Tensor({2}, {1.0, -1.0})));
  CHECK(plain.branch_signature() == 0);
  Tape a, b;
  a.track_branches(true);
  b.track_branches(true);
  ssmp(a.constant(Tensor({1, 1, 2}, {1.0, 2.0})), 1);
  ssmp(b.constant(Tensor({1, 1, 2}, {2.0, 1.0})), 1);
  CHECK(a.branch_signature() != b.branch_signature());
}

TEST_CASE("every primitive passes finite differences") {
  for (const auto& c : gradcases::primitive_cases()) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto r = c.run(seed);
      INFO(c.name, " seed ", seed, " worst ", r.worst_target, "[", r.worst_index, "] ad ", r.worst_analytic, " fd ",
           r.worst_numeric);
      CHECK(r.passed);
      CHECK(r.checked > 0);
    }
  }
}

TEST_CASE("adam: closed forms") {
  AdamOptions opt;
  opt.lr = 1e-3;
  opt.weight_decay = 0.0;
  Parameter p("p", Tensor({1}, {0.0}));
  p.grad = Tensor({1}, {1.0});
  p.has_grad = true;
  std::vector<Parameter*> ps{&p};
  adam_step(ps, opt);
  // first step: -lr * m_hat / (sqrt(v_hat) + eps) with m_hat = v_hat = 1
  CHECK(p.value[0] == doctest::Approx(-1e-3 / (1.0 + 1e-8)).epsilon(1e-14));
  CHECK(p.value[0] == doctest::Approx(-9.99999995e-4).epsilon(1e-8));
  CHECK(p.grad[0] == 0.0);
  CHECK(p.step == 1);

  Parameter z("z", Tensor({2}, {0.3, -0.7}));
  z.grad = Tensor({2}, {0.0, 0.0});
  z.has_grad = true;
  std::vector<Parameter*> zs{&z};
  adam_step(zs, opt);
  CHECK(z.value == Tensor({2}, {0.3, -0.7}));

  Parameter q("q", Tensor({1}, {1.0}));
  std::vector<Parameter*> qs{&q};
  double prev = q.value[0], last_delta = INFINITY;
  for (int i = 0; i < 5; ++i) {
    q.grad = Tensor({1}, {0.37});
    q.has_grad = true;
    adam_step(qs, opt);
    const double delta = std::abs(q.value[0] - prev);
    CHECK(delta <= last_delta + 1e-12);
    last_delta = delta;
    prev = q.value[0];
  }

  // decoupled decay shrinks the parameter before the moment update
  AdamOptions wd = opt;
  wd.weight_decay = 0.1;
  Parameter d("d", Tensor({1}, {2.0}));
  d.grad = Tensor({1}, {0.0});
  d.has_grad = true;
  std::vector<Parameter*> ds{&d};
  adam_step(ds, wd);
  CHECK(d.value[0] == doctest::Approx(2.0 - 1e-3 * 0.1 * 2.0).epsilon(1e-15));

  Parameter none("none", Tensor({1}, {1.0}));
  std::vector<Parameter*> ns{&none};
  CHECK_THROWS_AS(adam_step(ns, opt), ValidationError);
}

TEST_CASE("tape: fan-out accumulates and replay is deterministic") {
  Tape tape;
  Var x = tape.input(Tensor({2}, {1.5, -2.0}));
  Var y = add(mul(x, x), scale(x, 3.0));  // x^2 + 3x
  tape.backward(sum(y));
  CHECK(tape.grad(x) == Tensor({2}, {2 * 1.5 + 3, 2 * -2.0 + 3}));

  auto run = [] {
    Rng rng(42);
    ParamStore store;
    Mlp mlp(store, "m", {3, 8, 3}, rng);
    Tape t;
    const auto in = testutil::random_tensor({20, 3}, 5);
    PointCloud target = PointCloud::from_tensor(testutil::random_tensor({15, 3}, 6));
    Var loss = chamfer_loss(mlp.forward(t.constant(in)), target);
    t.backward(loss);
    return std::make_pair(loss.value()[0], store.at("m.0.weight").grad);
  };
  const auto a = run();
  const auto b = run();
  CHECK(a.first == b.first);
  CHECK(a.second == b.second);

  CHECK_THROWS_AS(tape.backward(y), ValidationError);
}

TEST_CASE("ops: shape errors") {
  Tape t;
  Var a = t.constant(Tensor({2, 3}));
  Var b = t.constant(Tensor({3, 2}));
  CHECK_THROWS_AS(add(a, b), ValidationError);
  CHECK_THROWS_AS(linear(a, t.constant(Tensor({2, 2})), t.constant(Tensor({2}))), ValidationError);
  CHECK_THROWS_AS(reshape(a, {4}), ValidationError);
  CHECK_THROWS_AS(softmax(a, 2), ValidationError);
}
