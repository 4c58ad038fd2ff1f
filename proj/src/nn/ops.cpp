#include "linext/nn/ops.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Core>

#include "linext/core/error.hpp"
#include "linext/spatial/kdtree.hpp"

namespace linext::nn {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using CMapMat = Eigen::Map<const RowMat>;
using CMapVec = Eigen::Map<const Eigen::VectorXd>;
using MapVec = Eigen::Map<Eigen::VectorXd>;

void require(bool ok, const std::string& what) {
  if (!ok) throw ValidationError(what);
}

void require_same(const Var& a, const Var& b, const char* op) {
  require(a.shape() == b.shape(), std::string(op) + ": shape mismatch " + shape_string(a.shape()) + " vs " +
                                      shape_string(b.shape()));
}

CMapMat as_mat(const Tensor& t) { return CMapMat(t.ptr(), static_cast<Eigen::Index>(t.dim(0)), static_cast<Eigen::Index>(t.size() / t.dim(0))); }
MapMat as_mat(Tensor& t) { return MapMat(t.ptr(), static_cast<Eigen::Index>(t.dim(0)), static_cast<Eigen::Index>(t.size() / t.dim(0))); }

void accumulate(Tensor* dst, const Tensor& src, double s = 1.0) {
  if (dst == nullptr) return;
  auto d = dst->data();
  auto g = src.data();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] += s * g[i];
}

}  // namespace

Var add(Var a, Var b) {
  require_same(a, b, "add");
  Tensor out = a.value();
  auto o = out.data();
  auto bv = b.value().data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] += bv[i];
  const auto ia = a.id(), ib = b.id();
  return a.tape().record(std::move(out), {a, b}, [ia, ib](Tape& t, std::size_t self) {
    const Tensor& g = t.out_grad(self);
    accumulate(t.grad_slot(ia), g);
    accumulate(t.grad_slot(ib), g);
  });
}

Var sub(Var a, Var b) {
  require_same(a, b, "sub");
  Tensor out = a.value();
  auto o = out.data();
  auto bv = b.value().data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] -= bv[i];
  const auto ia = a.id(), ib = b.id();
  return a.tape().record(std::move(out), {a, b}, [ia, ib](Tape& t, std::size_t self) {
    const Tensor& g = t.out_grad(self);
    accumulate(t.grad_slot(ia), g);
    accumulate(t.grad_slot(ib), g, -1.0);
  });
}

Var mul(Var a, Var b) {
  require_same(a, b, "mul");
  Tensor out = a.value();
  auto o = out.data();
  auto bv = b.value().data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] *= bv[i];
  const auto ia = a.id(), ib = b.id();
  return a.tape().record(std::move(out), {a, b}, [ia, ib](Tape& t, std::size_t self) {
    auto g = t.out_grad(self).data();
    if (Tensor* da = t.grad_slot(ia)) {
      auto bv = t.value(ib).data();
      auto d = da->data();
      for (std::size_t i = 0; i < d.size(); ++i) d[i] += g[i] * bv[i];
    }
    if (Tensor* db = t.grad_slot(ib)) {
      auto av = t.value(ia).data();
      auto d = db->data();
      for (std::size_t i = 0; i < d.size(); ++i) d[i] += g[i] * av[i];
    }
  });
}

Var scale(Var a, double s) {
  Tensor out = a.value();
  for (auto& x : out.data()) x *= s;
  const auto ia = a.id();
  return a.tape().record(std::move(out), {a}, [ia, s](Tape& t, std::size_t self) {
    accumulate(t.grad_slot(ia), t.out_grad(self), s);
  });
}

Var relu(Var x) {
  Tensor out = x.value();
  for (auto& v : out.data()) v = v > 0.0 ? v : 0.0;
  if (x.tape().tracking_branches()) {
    for (double v : x.value().data()) x.tape().note_branch(v > 0.0);
  }
  const auto ix = x.id();
  return x.tape().record(std::move(out), {x}, [ix](Tape& t, std::size_t self) {
    Tensor* dx = t.grad_slot(ix);
    auto g = t.out_grad(self).data();
    auto xv = t.value(ix).data();
    auto d = dx->data();
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (xv[i] > 0.0) d[i] += g[i];
    }
  });
}

Var tanh(Var x) {
  Tensor out = x.value();
  for (auto& v : out.data()) v = std::tanh(v);
  const auto ix = x.id();
  return x.tape().record(std::move(out), {x}, [ix](Tape& t, std::size_t self) {
    Tensor* dx = t.grad_slot(ix);
    auto g = t.out_grad(self).data();
    auto y = t.value(self).data();
    auto d = dx->data();
    for (std::size_t i = 0; i < d.size(); ++i) d[i] += g[i] * (1.0 - y[i] * y[i]);
  });
}

Var linear(Var x, Var w, Var b) {
  require(x.value().rank() == 2 && w.value().rank() == 2 && b.value().rank() == 1, "linear: expected x[N,I], w[I,O], b[O]");
  require(x.dim(1) == w.dim(0) && w.dim(1) == b.dim(0),
          "linear: shape mismatch " + shape_string(x.shape()) + " * " + shape_string(w.shape()) + " + " +
              shape_string(b.shape()));
  const std::size_t n = x.dim(0), o = w.dim(1);
  Tensor out = Tensor::uninitialized({n, o});
  {
    auto y = as_mat(out);
    y.noalias() = as_mat(x.value()) * as_mat(w.value());
    y.rowwise() += CMapVec(b.value().ptr(), static_cast<Eigen::Index>(o)).transpose();
  }
  const auto ix = x.id(), iw = w.id(), ib = b.id();
  return x.tape().record(std::move(out), {x, w, b}, [ix, iw, ib](Tape& t, std::size_t self) {
    auto g = as_mat(t.out_grad(self));
    if (Tensor* dx = t.grad_slot(ix)) as_mat(*dx).noalias() += g * as_mat(t.value(iw)).transpose();
    if (Tensor* dw = t.grad_slot(iw)) as_mat(*dw).noalias() += as_mat(t.value(ix)).transpose() * g;
    if (Tensor* db = t.grad_slot(ib)) MapVec(db->ptr(), static_cast<Eigen::Index>(db->size())) += g.colwise().sum().transpose();
  });
}

Var concat_cols(std::span<const Var> parts) {
  require(!parts.empty(), "concat_cols: no inputs");
  const std::size_t n = parts[0].dim(0);
  std::size_t total = 0;
  std::vector<std::size_t> ids, widths;
  for (const auto& p : parts) {
    require(p.value().rank() == 2 && p.dim(0) == n, "concat_cols: inputs must be rank 2 with equal rows");
    require(&p.tape() == &parts[0].tape(), "concat_cols: mixed tapes");
    ids.push_back(p.id());
    widths.push_back(p.dim(1));
    total += p.dim(1);
  }
  Tensor out = Tensor::uninitialized({n, total});
  std::size_t off = 0;
  for (const auto& p : parts) {
    const std::size_t w = p.dim(1);
    const double* src = p.value().ptr();
    for (std::size_t r = 0; r < n; ++r) std::copy_n(src + r * w, w, out.ptr() + r * total + off);
    off += w;
  }
  Tape& tape = parts[0].tape();
  return tape.record(std::move(out), parts, [ids, widths, total, n](Tape& t, std::size_t self) {
    const double* g = t.out_grad(self).ptr();
    std::size_t off = 0;
    for (std::size_t k = 0; k < ids.size(); ++k) {
      if (Tensor* d = t.grad_slot(ids[k])) {
        double* dp = d->ptr();
        for (std::size_t r = 0; r < n; ++r) {
          for (std::size_t c = 0; c < widths[k]; ++c) dp[r * widths[k] + c] += g[r * total + off + c];
        }
      }
      off += widths[k];
    }
  });
}

Var gather_rows(Var src, std::span<const std::size_t> idx) {
  require(src.value().rank() == 2, "gather_rows: src must be rank 2");
  require(!idx.empty(), "gather_rows: empty index list");
  const std::size_t n = src.dim(0), c = src.dim(1);
  Tensor out = Tensor::uninitialized({idx.size(), c});
  const double* s = src.value().ptr();
  for (std::size_t m = 0; m < idx.size(); ++m) {
    if (idx[m] >= n) throw ValidationError("gather_rows: index out of range");
    std::copy_n(s + idx[m] * c, c, out.ptr() + m * c);
  }
  const auto is = src.id();
  std::vector<std::size_t> rows(idx.begin(), idx.end());
  return src.tape().record(std::move(out), {src}, [is, rows = std::move(rows), c](Tape& t, std::size_t self) {
    Tensor* d = t.grad_slot(is);
    const double* g = t.out_grad(self).ptr();
    double* dp = d->ptr();
    for (std::size_t m = 0; m < rows.size(); ++m) {
      double* dst = dp + rows[m] * c;
      const double* gs = g + m * c;
      for (std::size_t ch = 0; ch < c; ++ch) dst[ch] += gs[ch];
    }
  });
}

Var segment_mean(Var x, std::span<const std::size_t> segment_of, std::size_t segments) {
  require(x.value().rank() == 2 && x.dim(0) == segment_of.size(), "segment_mean: one segment id per row");
  const std::size_t c = x.dim(1);
  std::vector<double> inv(segments, 0.0);
  for (auto s : segment_of) {
    if (s >= segments) throw ValidationError("segment_mean: segment id out of range");
    inv[s] += 1.0;
  }
  for (auto& v : inv) v = v > 0.0 ? 1.0 / v : 0.0;
  Tensor out({segments, c});
  const double* xv = x.value().ptr();
  for (std::size_t r = 0; r < segment_of.size(); ++r) {
    double* dst = out.ptr() + segment_of[r] * c;
    for (std::size_t ch = 0; ch < c; ++ch) dst[ch] += xv[r * c + ch];
  }
  for (std::size_t s = 0; s < segments; ++s) {
    for (std::size_t ch = 0; ch < c; ++ch) out.ptr()[s * c + ch] *= inv[s];
  }
  const auto ix = x.id();
  std::vector<std::size_t> seg(segment_of.begin(), segment_of.end());
  return x.tape().record(std::move(out), {x}, [ix, seg = std::move(seg), inv = std::move(inv), c](Tape& t, std::size_t self) {
    Tensor* d = t.grad_slot(ix);
    const double* g = t.out_grad(self).ptr();
    double* dp = d->ptr();
    for (std::size_t r = 0; r < seg.size(); ++r) {
      const double w = inv[seg[r]];
      for (std::size_t ch = 0; ch < c; ++ch) dp[r * c + ch] += w * g[seg[r] * c + ch];
    }
  });
}

Var gather_neighbors(Var src, const spatial::NeighborIndex& idx) {
  require(src.value().rank() == 2, "gather_neighbors: src must be rank 2");
  idx.validate(src.dim(0));
  const std::size_t m = idx.queries(), k = idx.k(), c = src.dim(1);
  require(m > 0 && k > 0, "gather_neighbors: empty neighbour index");
  Tensor out = Tensor::uninitialized({m, c, k});
  const double* s = src.value().ptr();
  double* o = out.ptr();
  for (std::size_t q = 0; q < m; ++q) {
    const auto row = idx.row(q);
    for (std::size_t ch = 0; ch < c; ++ch) {
      for (std::size_t j = 0; j < k; ++j) o[(q * c + ch) * k + j] = s[row[j] * c + ch];
    }
  }
  const auto is = src.id();
  return src.tape().record(std::move(out), {src}, [is, idx, m, k, c](Tape& t, std::size_t self) {
    Tensor* d = t.grad_slot(is);
    const double* g = t.out_grad(self).ptr();
    double* dp = d->ptr();
    for (std::size_t q = 0; q < m; ++q) {
      const auto row = idx.row(q);
      for (std::size_t ch = 0; ch < c; ++ch) {
        for (std::size_t j = 0; j < k; ++j) dp[row[j] * c + ch] += g[(q * c + ch) * k + j];
      }
    }
  });
}

Var broadcast_k(Var x, std::size_t k) {
  require(x.value().rank() == 2 && k > 0, "broadcast_k: expected rank-2 input and k > 0");
  const std::size_t rows = x.value().size();
  Tensor out = Tensor::uninitialized({x.dim(0), x.dim(1), k});
  const double* xv = x.value().ptr();
  double* o = out.ptr();
  for (std::size_t r = 0; r < rows; ++r) std::fill_n(o + r * k, k, xv[r]);
  const auto ix = x.id();
  return x.tape().record(std::move(out), {x}, [ix, rows, k](Tape& t, std::size_t self) {
    Tensor* d = t.grad_slot(ix);
    const double* g = t.out_grad(self).ptr();
    double* dp = d->ptr();
    for (std::size_t r = 0; r < rows; ++r) {
      double acc = 0.0;
      for (std::size_t j = 0; j < k; ++j) acc += g[r * k + j];
      dp[r] += acc;
    }
  });
}

Var ssmp(Var x, std::size_t segments) {
  require(x.value().rank() == 3, "ssmp: expected N x C x K");
  const std::size_t k = x.dim(2);
  if (segments == 0 || k % segments != 0) {
    throw ValidationError("ssmp: segment count " + std::to_string(segments) + " does not divide K=" + std::to_string(k));
  }
  const std::size_t rows = x.dim(0) * x.dim(1);
  const std::size_t len = k / segments;
  Tensor out = Tensor::uninitialized({x.dim(0), x.dim(1), segments});
  std::vector<std::uint32_t> arg(rows * segments);
  const double* xv = x.value().ptr();
  double* o = out.ptr();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t s = 0; s < segments; ++s) {
      const double* seg = xv + r * k + s * len;
      std::size_t best = 0;
      for (std::size_t l = 1; l < len; ++l) {
        if (seg[l] > seg[best]) best = l;
      }
      o[r * segments + s] = seg[best];
      arg[r * segments + s] = static_cast<std::uint32_t>(s * len + best);
    }
  }
  if (x.tape().tracking_branches()) {
    for (auto a : arg) x.tape().note_branch(a);
  }
  const auto ix = x.id();
  return x.tape().record(std::move(out), {x}, [ix, arg = std::move(arg), rows, segments, k](Tape& t, std::size_t self) {
    Tensor* d = t.grad_slot(ix);
    const double* g = t.out_grad(self).ptr();
    double* dp = d->ptr();
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t s = 0; s < segments; ++s) dp[r * k + arg[r * segments + s]] += g[r * segments + s];
    }
  });
}

Var relative_max_pool(Var alpha, Var key, const spatial::NeighborIndex& idx, std::size_t segments) {
  const std::size_t m = idx.queries(), k = idx.k();
  require(m > 0 && k > 0, "relative_max_pool: empty neighbour index");
  require(key.value().rank() == 2 && alpha.value().rank() == 2 && alpha.dim(0) == m * k &&
              alpha.dim(1) == key.dim(1),
          "relative_max_pool: expected alpha (M*K) x C and key N x C");
  if (segments == 0 || k % segments != 0) {
    throw ValidationError("relative_max_pool: segment count " + std::to_string(segments) + " does not divide K=" +
                          std::to_string(k));
  }
  idx.validate(key.dim(0));
  const std::size_t c = key.dim(1), len = k / segments;
  require(alpha.value().size() < (std::size_t{1} << 32) && key.value().size() < (std::size_t{1} << 32),
          "relative_max_pool: tensor too large");
  Tensor out = Tensor::uninitialized({m * segments, c});
  // Winning alpha row and key row of every output element.
  std::vector<std::uint32_t> arg_a(out.size()), arg_k(out.size());
  const double* a = alpha.value().ptr();
  const double* kv = key.value().ptr();
  double* o = out.ptr();
  for (std::size_t q = 0; q < m; ++q) {
    const auto row = idx.row(q);
    for (std::size_t s = 0; s < segments; ++s) {
      const std::size_t base = (q * segments + s) * c;
      for (std::size_t j = s * len; j < (s + 1) * len; ++j) {
        const double* ar = a + (q * k + j) * c;
        const double* kr = kv + row[j] * c;
        for (std::size_t ch = 0; ch < c; ++ch) {
          const double v = ar[ch] - kr[ch];
          if (j == s * len || v > o[base + ch]) {
            o[base + ch] = v;
            arg_a[base + ch] = static_cast<std::uint32_t>((q * k + j) * c + ch);
            arg_k[base + ch] = static_cast<std::uint32_t>(row[j] * c + ch);
          }
        }
      }
    }
  }
  if (alpha.tape().tracking_branches()) {
    for (std::size_t i = 0; i < arg_a.size(); ++i) alpha.tape().note_branch((std::uint64_t{arg_a[i]} << 32) | arg_k[i]);
  }
  const auto ia = alpha.id(), ik = key.id();
  return alpha.tape().record(std::move(out), {alpha, key},
                             [ia, ik, arg_a = std::move(arg_a), arg_k = std::move(arg_k)](Tape& t, std::size_t self) {
                               const double* g = t.out_grad(self).ptr();
                               if (Tensor* d = t.grad_slot(ia)) {
                                 for (std::size_t i = 0; i < arg_a.size(); ++i) (*d)[arg_a[i]] += g[i];
                               }
                               if (Tensor* d = t.grad_slot(ik)) {
                                 for (std::size_t i = 0; i < arg_k.size(); ++i) (*d)[arg_k[i]] -= g[i];
                               }
                             });
}

Var swap_last_axes(Var x) {
  require(x.value().rank() == 3, "swap_last_axes: expected a rank-3 tensor");
  const std::size_t a = x.dim(0), b = x.dim(1), c = x.dim(2);
  Tensor out = Tensor::uninitialized({a, c, b});
  const double* xv = x.value().ptr();
  double* o = out.ptr();
  for (std::size_t i = 0; i < a; ++i) {
    for (std::size_t j = 0; j < b; ++j) {
      for (std::size_t l = 0; l < c; ++l) o[(i * c + l) * b + j] = xv[(i * b + j) * c + l];
    }
  }
  const auto ix = x.id();
  return x.tape().record(std::move(out), {x}, [ix, a, b, c](Tape& t, std::size_t self) {
    Tensor* d = t.grad_slot(ix);
    const double* g = t.out_grad(self).ptr();
    double* dp = d->ptr();
    for (std::size_t i = 0; i < a; ++i) {
      for (std::size_t j = 0; j < b; ++j) {
        for (std::size_t l = 0; l < c; ++l) dp[(i * b + j) * c + l] += g[(i * c + l) * b + j];
      }
    }
  });
}

Var reshape(Var x, std::vector<std::size_t> shape) {
  Tensor out = x.value().reshaped(std::move(shape));
  const auto ix = x.id();
  return x.tape().record(std::move(out), {x}, [ix](Tape& t, std::size_t self) {
    Tensor* d = t.grad_slot(ix);
    auto g = t.out_grad(self).data();
    auto dp = d->data();
    for (std::size_t i = 0; i < dp.size(); ++i) dp[i] += g[i];
  });
}

Var softmax(Var x, std::size_t axis) {
  const auto& shape = x.shape();
  require(axis < shape.size(), "softmax: axis out of range");
  std::size_t outer = 1, inner = 1;
  for (std::size_t i = 0; i < axis; ++i) outer *= shape[i];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) inner *= shape[i];
  const std::size_t len = shape[axis];
  Tensor out = x.value();
  double* o = out.ptr();
  for (std::size_t a = 0; a < outer; ++a) {
    for (std::size_t c = 0; c < inner; ++c) {
      double* base = o + a * len * inner + c;
      double mx = base[0];
      for (std::size_t l = 1; l < len; ++l) mx = std::max(mx, base[l * inner]);
      double z = 0.0;
      for (std::size_t l = 0; l < len; ++l) {
        base[l * inner] = std::exp(base[l * inner] - mx);
        z += base[l * inner];
      }
      for (std::size_t l = 0; l < len; ++l) base[l * inner] /= z;
    }
  }
  const auto ix = x.id();
  return x.tape().record(std::move(out), {x}, [ix, outer, inner, len](Tape& t, std::size_t self) {
    Tensor* d = t.grad_slot(ix);
    const double* g = t.out_grad(self).ptr();
    const double* y = t.value(self).ptr();
    double* dp = d->ptr();
    for (std::size_t a = 0; a < outer; ++a) {
      for (std::size_t c = 0; c < inner; ++c) {
        const std::size_t base = a * len * inner + c;
        double dot = 0.0;
        for (std::size_t l = 0; l < len; ++l) dot += g[base + l * inner] * y[base + l * inner];
        for (std::size_t l = 0; l < len; ++l) {
          const std::size_t e = base + l * inner;
          dp[e] += y[e] * (g[e] - dot);
        }
      }
    }
  });
}

Var sum_middle(Var x) {
  require(x.value().rank() == 3, "sum_middle: expected a rank-3 tensor");
  const std::size_t a = x.dim(0), b = x.dim(1), c = x.dim(2);
  Tensor out({a, c});
  const double* xv = x.value().ptr();
  double* o = out.ptr();
  for (std::size_t i = 0; i < a; ++i) {
    for (std::size_t j = 0; j < b; ++j) {
      for (std::size_t l = 0; l < c; ++l) o[i * c + l] += xv[(i * b + j) * c + l];
    }
  }
  const auto ix = x.id();
  return x.tape().record(std::move(out), {x}, [ix, a, b, c](Tape& t, std::size_t self) {
    Tensor* d = t.grad_slot(ix);
    const double* g = t.out_grad(self).ptr();
    double* dp = d->ptr();
    for (std::size_t i = 0; i < a; ++i) {
      for (std::size_t j = 0; j < b; ++j) {
        for (std::size_t l = 0; l < c; ++l) dp[(i * b + j) * c + l] += g[i * c + l];
      }
    }
  });
}

Var sum(Var x) {
  double s = 0.0;
  for (double v : x.value().data()) s += v;
  const auto ix = x.id();
  return x.tape().record(Tensor({1}, {s}), {x}, [ix](Tape& t, std::size_t self) {
    Tensor* d = t.grad_slot(ix);
    const double g = t.out_grad(self)[0];
    for (auto& v : d->data()) v += g;
  });
}

Var mean(Var x) { return scale(sum(x), 1.0 / static_cast<double>(x.value().size())); }

Var weighted_sum(Var x, const Tensor& w) {
  require(w.shape() == x.shape(), "weighted_sum: weight shape mismatch");
  double s = 0.0;
  auto xv = x.value().data();
  auto wv = w.data();
  for (std::size_t i = 0; i < xv.size(); ++i) s += xv[i] * wv[i];
  const auto ix = x.id();
  return x.tape().record(Tensor({1}, {s}), {x}, [ix, w](Tape& t, std::size_t self) {
    Tensor* d = t.grad_slot(ix);
    const double g = t.out_grad(self)[0];
    auto dp = d->data();
    auto wv = w.data();
    for (std::size_t i = 0; i < dp.size(); ++i) dp[i] += g * wv[i];
  });
}

Var sparse_conv(Var x, Var w, Var b, std::shared_ptr<const spatial::Rulebook> rulebook) {
  require(rulebook != nullptr, "sparse_conv: missing rulebook");
  const spatial::Rulebook& rules = *rulebook;
  require(x.value().rank() == 2 && x.dim(0) == rules.cell_count, "sparse_conv: features must be cells x I");
  require(w.value().rank() == 3 && w.dim(0) == spatial::kKernelVolume && w.dim(1) == x.dim(1),
          "sparse_conv: kernel must be 27 x I x O");
  require(b.value().rank() == 1 && b.dim(0) == w.dim(2), "sparse_conv: bias must have O entries");
  const std::size_t ci = w.dim(1), co = w.dim(2), cells = rules.cell_count;
  const auto ei = static_cast<Eigen::Index>(ci), eo = static_cast<Eigen::Index>(co);
  Tensor out({cells, co});
  auto y = as_mat(out);
  y.rowwise() = CMapVec(b.value().ptr(), eo).transpose();
  const auto xin = as_mat(x.value());
  RowMat gathered, partial;
  for (std::size_t o = 0; o < spatial::kKernelVolume; ++o) {
    const auto& pairs = rules.pairs[o];
    if (pairs.empty()) continue;
    const CMapMat wo(w.value().ptr() + o * ci * co, ei, eo);
    gathered.resize(static_cast<Eigen::Index>(pairs.size()), ei);
    for (std::size_t p = 0; p < pairs.size(); ++p) gathered.row(static_cast<Eigen::Index>(p)) = xin.row(static_cast<Eigen::Index>(pairs[p].first));
    partial.noalias() = gathered * wo;
    for (std::size_t p = 0; p < pairs.size(); ++p) y.row(static_cast<Eigen::Index>(pairs[p].second)) += partial.row(static_cast<Eigen::Index>(p));
  }
  const auto ix = x.id(), iw = w.id(), ib = b.id();
  return x.tape().record(std::move(out), {x, w, b}, [ix, iw, ib, rulebook, ci, co](Tape& t, std::size_t self) {
    const spatial::Rulebook& rules = *rulebook;
    const auto ei = static_cast<Eigen::Index>(ci), eo = static_cast<Eigen::Index>(co);
    const auto g = as_mat(t.out_grad(self));
    Tensor* dx = t.grad_slot(ix);
    Tensor* dw = t.grad_slot(iw);
    if (Tensor* db = t.grad_slot(ib)) MapVec(db->ptr(), eo) += g.colwise().sum().transpose();
    const auto xin = as_mat(t.value(ix));
    RowMat gout, gin, xin_g;
    for (std::size_t o = 0; o < spatial::kKernelVolume; ++o) {
      const auto& pairs = rules.pairs[o];
      if (pairs.empty()) continue;
      const auto np = static_cast<Eigen::Index>(pairs.size());
      gout.resize(np, eo);
      for (Eigen::Index p = 0; p < np; ++p) gout.row(p) = g.row(static_cast<Eigen::Index>(pairs[static_cast<std::size_t>(p)].second));
      if (dw != nullptr) {
        xin_g.resize(np, ei);
        for (Eigen::Index p = 0; p < np; ++p) xin_g.row(p) = xin.row(static_cast<Eigen::Index>(pairs[static_cast<std::size_t>(p)].first));
        MapMat(dw->ptr() + o * ci * co, ei, eo).noalias() += xin_g.transpose() * gout;
      }
      if (dx != nullptr) {
        const CMapMat wo(t.value(iw).ptr() + o * ci * co, ei, eo);
        gin.noalias() = gout * wo.transpose();
        auto dxm = as_mat(*dx);
        for (Eigen::Index p = 0; p < np; ++p) dxm.row(static_cast<Eigen::Index>(pairs[static_cast<std::size_t>(p)].first)) += gin.row(p);
      }
    }
  });
}

Var chamfer_loss(Var pred, const PointCloud& target) {
  require(pred.value().rank() == 2 && pred.dim(1) == 3, "chamfer_loss: pred must be N x 3");
  require(!target.empty(), "chamfer_loss: empty target");
  const PointCloud p = PointCloud::from_tensor(pred.value());
  const auto to_target = spatial::knn_tree(p, target, 1);
  const auto to_pred = spatial::knn_tree(target, p, 1);
  const double np = static_cast<double>(p.size()), nq = static_cast<double>(target.size());
  double a = 0.0, b = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) a += squared_distance(p[i], target[to_target.row(i)[0]]);
  for (std::size_t j = 0; j < target.size(); ++j) b += squared_distance(target[j], p[to_pred.row(j)[0]]);
  if (pred.tape().tracking_branches()) {
    for (auto i : to_target.flat()) pred.tape().note_branch(i);
    for (auto j : to_pred.flat()) pred.tape().note_branch(j);
  }
  const auto ip = pred.id();
  return pred.tape().record(Tensor({1}, {a / np + b / nq}), {pred},
                            [ip, p, target, to_target, to_pred, np, nq](Tape& t, std::size_t self) {
    Tensor* d = t.grad_slot(ip);
    const double g = t.out_grad(self)[0];
    auto add_row = [&](std::size_t i, Point3 v, double s) {
      d->at(i, 0) += s * v.x;
      d->at(i, 1) += s * v.y;
      d->at(i, 2) += s * v.z;
    };
    for (std::size_t i = 0; i < p.size(); ++i) add_row(i, p[i] - target[to_target.row(i)[0]], 2.0 * g / np);
    for (std::size_t j = 0; j < target.size(); ++j) {
      const std::size_t i = to_pred.row(j)[0];
      add_row(i, p[i] - target[j], 2.0 * g / nq);
    }
  });
}

}  // namespace linext::nn
