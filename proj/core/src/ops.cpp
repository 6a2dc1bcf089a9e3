#include "disk/ops.hpp"

#include <Eigen/Core>
#include <limits>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "disk/error.hpp"

namespace disk::ops {

namespace {

using NodePtr = std::shared_ptr<detail::Node>;
using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;
using MutMap = Eigen::Map<RowMat>;

// Registers `rule` as the adjoint of `out`; the rule receives dL/d(out).
template <class Rule>
void record(std::string_view name, Tensor& out, Rule rule) {
  out.set_requires_grad(true);
  NodePtr out_node = out.node();
  Tape::current().push(name, [out_node, rule = std::move(rule)]() {
    if (out_node->grad.empty()) return;
    rule(out_node->grad);
  });
}

std::size_t normalize_axis(int axis, std::size_t rank) {
  const int r = static_cast<int>(rank);
  const int a = axis < 0 ? axis + r : axis;
  if (a < 0 || a >= r) {
    throw ShapeError("axis " + std::to_string(axis) + " invalid for rank " + std::to_string(rank));
  }
  return static_cast<std::size_t>(a);
}

bool is_suffix(const Shape& shorter, const Shape& longer) {
  if (shorter.size() > longer.size()) return false;
  return std::equal(shorter.rbegin(), shorter.rend(), longer.rbegin());
}

// Shape of a broadcast binary op; throws naming both shapes.
Shape broadcast_shape(const char* op, const Tensor& a, const Tensor& b) {
  if (is_suffix(b.shape(), a.shape())) return a.shape();
  if (is_suffix(a.shape(), b.shape())) return b.shape();
  throw ShapeError(std::string(op) + ": incompatible shapes " + shape_str(a.shape()) + " and " +
                   shape_str(b.shape()));
}

// Calls fn(i, ia, ib) over the broadcast index space. The shorter operand's
// length divides n, so its index is the position inside the current period.
template <class Fn>
void broadcast_loop(std::size_t n, std::size_t na, std::size_t nb, Fn fn) {
  const std::size_t period = std::min(na, nb);
  if (period == 0) return;
  if (na == nb) {
    for (std::size_t i = 0; i < n; ++i) fn(i, i, i);
  } else if (na == n) {
    for (std::size_t base = 0; base < n; base += period) {
      for (std::size_t j = 0; j < period; ++j) fn(base + j, base + j, j);
    }
  } else {
    for (std::size_t base = 0; base < n; base += period) {
      for (std::size_t j = 0; j < period; ++j) fn(base + j, j, base + j);
    }
  }
}

// f(x, y) and its partials df/dx, df/dy evaluated at (x, y).
template <class F, class Dx, class Dy>
Tensor binary(const char* name, const Tensor& a, const Tensor& b, F f, Dx dfdx, Dy dfdy) {
  Shape shape = broadcast_shape(name, a, b);
  const std::size_t n = shape_numel(shape);
  const std::size_t na = a.size();
  const std::size_t nb = b.size();
  const double* av = a.data().data();
  const double* bv = b.data().data();
  Buffer out(n);
  broadcast_loop(n, na, nb, [&](std::size_t i, std::size_t ia, std::size_t ib) {
    out[i] = f(av[ia], bv[ib]);
  });
  Tensor result = make_result(std::move(shape), std::move(out));
  if (needs_grad({&a, &b})) {
    NodePtr an = a.node();
    NodePtr bn = b.node();
    record(name, result, [an, bn, n, na, nb, dfdx, dfdy](const Buffer& g) {
      const double* ad = an->data.data();
      const double* bd = bn->data.data();
      if (an->requires_grad) {
        double* ga = an->grad_buffer().data();
        broadcast_loop(n, na, nb, [&](std::size_t i, std::size_t ia, std::size_t ib) {
          ga[ia] += g[i] * dfdx(ad[ia], bd[ib]);
        });
      }
      if (bn->requires_grad) {
        double* gb = bn->grad_buffer().data();
        broadcast_loop(n, na, nb, [&](std::size_t i, std::size_t ia, std::size_t ib) {
          gb[ib] += g[i] * dfdy(ad[ia], bd[ib]);
        });
      }
    });
  }
  return result;
}

// y = f(x) with dy/dx expressed through x and y.
template <class F, class D>
Tensor unary(const char* name, const Tensor& x, F f, D dfdx) {
  const std::size_t n = x.size();
  auto xv = x.data();
  Buffer out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = f(xv[i]);
  Tensor result = make_result(x.shape(), std::move(out));
  if (needs_grad({&x})) {
    NodePtr xn = x.node();
    NodePtr yn = result.node();
    record(name, result, [xn, yn, n, dfdx](const Buffer& g) {
      auto& gx = xn->grad_buffer();
      for (std::size_t i = 0; i < n; ++i) gx[i] += g[i] * dfdx(xn->data[i], yn->data[i]);
    });
  }
  return result;
}

struct AxisSplit {
  std::size_t outer = 1;
  std::size_t len = 1;
  std::size_t inner = 1;
};

AxisSplit split_axis(const Shape& shape, std::size_t axis) {
  AxisSplit s;
  for (std::size_t i = 0; i < axis; ++i) s.outer *= shape[i];
  s.len = shape[axis];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) s.inner *= shape[i];
  return s;
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() < 2 || b.rank() < 2) {
    throw ShapeError("matmul: operands must be at least 2-D, got " + shape_str(a.shape()) +
                     " and " + shape_str(b.shape()));
  }
  const std::size_t m = a.dim(-2);
  const std::size_t k = a.dim(-1);
  const std::size_t n = b.dim(-1);
  if (b.dim(-2) != k) {
    throw ShapeError("matmul: inner dimensions differ for " + shape_str(a.shape()) + " and " +
                     shape_str(b.shape()));
  }
  const Shape a_batch(a.shape().begin(), a.shape().end() - 2);
  const Shape b_batch(b.shape().begin(), b.shape().end() - 2);
  Shape out_batch;
  if (a_batch == b_batch || b_batch.empty()) {
    out_batch = a_batch;
  } else if (a_batch.empty()) {
    out_batch = b_batch;
  } else {
    throw ShapeError("matmul: batch dimensions of " + shape_str(a.shape()) + " and " +
                     shape_str(b.shape()) + " are not broadcastable");
  }
  const std::size_t batch = shape_numel(out_batch);
  const bool a_shared = a_batch.empty() && batch > 1;
  const bool b_shared = b_batch.empty();

  Shape out_shape = out_batch;
  out_shape.push_back(m);
  out_shape.push_back(n);
  Buffer out(batch * m * n);
  const double* ap = a.data().data();
  const double* bp = b.data().data();
  if (b_shared && !a_shared) {
    // Fold the batch into rows: one GEMM.
    MutMap(out.data(), batch * m, n).noalias() = ConstMap(ap, batch * m, k) * ConstMap(bp, k, n);
  } else {
    for (std::size_t i = 0; i < batch; ++i) {
      const double* ai = a_shared ? ap : ap + i * m * k;
      const double* bi = b_shared ? bp : bp + i * k * n;
      MutMap(out.data() + i * m * n, m, n).noalias() = ConstMap(ai, m, k) * ConstMap(bi, k, n);
    }
  }
  Tensor result = make_result(std::move(out_shape), std::move(out));
  if (needs_grad({&a, &b})) {
    NodePtr an = a.node();
    NodePtr bn = b.node();
    record("matmul", result,
           [an, bn, batch, m, k, n, a_shared, b_shared](const Buffer& g) {
             const double* ap = an->data.data();
             const double* bp = bn->data.data();
             if (b_shared && !a_shared) {
               ConstMap gm(g.data(), batch * m, n);
               if (an->requires_grad) {
                 MutMap(an->grad_buffer().data(), batch * m, k).noalias() +=
                     gm * ConstMap(bp, k, n).transpose();
               }
               if (bn->requires_grad) {
                 MutMap(bn->grad_buffer().data(), k, n).noalias() +=
                     ConstMap(ap, batch * m, k).transpose() * gm;
               }
               return;
             }
             for (std::size_t i = 0; i < batch; ++i) {
               ConstMap gi(g.data() + i * m * n, m, n);
               const std::size_t a_off = a_shared ? 0 : i * m * k;
               const std::size_t b_off = b_shared ? 0 : i * k * n;
               if (an->requires_grad) {
                 MutMap(an->grad_buffer().data() + a_off, m, k).noalias() +=
                     gi * ConstMap(bp + b_off, k, n).transpose();
               }
               if (bn->requires_grad) {
                 MutMap(bn->grad_buffer().data() + b_off, k, n).noalias() +=
                     ConstMap(ap + a_off, m, k).transpose() * gi;
               }
             }
           });
  }
  return result;
}

Tensor linear(const Tensor& x, const Tensor& w, const Tensor& bias) {
  return add(matmul(x, w), bias);
}

Tensor add(const Tensor& a, const Tensor& b) {
  return binary(
      "add", a, b, [](double x, double y) { return x + y; }, [](double, double) { return 1.0; },
      [](double, double) { return 1.0; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return binary(
      "sub", a, b, [](double x, double y) { return x - y; }, [](double, double) { return 1.0; },
      [](double, double) { return -1.0; });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  return binary(
      "mul", a, b, [](double x, double y) { return x * y; }, [](double, double y) { return y; },
      [](double x, double) { return x; });
}

Tensor div(const Tensor& a, const Tensor& b) {
  return binary(
      "div", a, b, [](double x, double y) { return x / y; },
      [](double, double y) { return 1.0 / y; }, [](double x, double y) { return -x / (y * y); });
}

Tensor scale(const Tensor& x, double factor) {
  return unary(
      "scale", x, [factor](double v) { return v * factor; },
      [factor](double, double) { return factor; });
}

Tensor add_scalar(const Tensor& x, double offset) {
  return unary(
      "add_scalar", x, [offset](double v) { return v + offset; },
      [](double, double) { return 1.0; });
}

Tensor neg(const Tensor& x) { return scale(x, -1.0); }

Tensor gelu(const Tensor& x) {
  constexpr double inv_sqrt2 = 0.70710678118654752440;
  const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  return unary(
      "gelu", x, [](double v) { return 0.5 * v * (1.0 + std::erf(v * inv_sqrt2)); },
      [inv_sqrt_2pi](double v, double) {
        const double cdf = 0.5 * (1.0 + std::erf(v * inv_sqrt2));
        return cdf + v * inv_sqrt_2pi * std::exp(-0.5 * v * v);
      });
}

Tensor sin(const Tensor& x) {
  return unary(
      "sin", x, [](double v) { return std::sin(v); },
      [](double v, double) { return std::cos(v); });
}

Tensor cos(const Tensor& x) {
  return unary(
      "cos", x, [](double v) { return std::cos(v); },
      [](double v, double) { return -std::sin(v); });
}

Tensor exp(const Tensor& x) {
  return unary(
      "exp", x, [](double v) { return std::exp(v); }, [](double, double y) { return y; });
}

Tensor log(const Tensor& x) {
  return unary(
      "log", x, [](double v) { return std::log(v); }, [](double v, double) { return 1.0 / v; });
}

Tensor sigmoid(const Tensor& x) {
  return unary(
      "sigmoid", x, [](double v) { return 1.0 / (1.0 + std::exp(-v)); },
      [](double, double y) { return y * (1.0 - y); });
}

Tensor clamp(const Tensor& x, double lo, double hi) {
  if (!(lo <= hi)) throw ParameterError("clamp: lo > hi");
  return unary(
      "clamp", x, [lo, hi](double v) { return std::clamp(v, lo, hi); },
      [lo, hi](double v, double) { return (v > lo && v < hi) ? 1.0 : 0.0; });
}

Tensor sum(const Tensor& x) {
  auto xv = x.data();
  const double total = std::accumulate(xv.begin(), xv.end(), 0.0);
  Tensor result = make_result({}, {total});
  if (needs_grad({&x})) {
    NodePtr xn = x.node();
    record("sum", result, [xn](const Buffer& g) {
      for (double& v : xn->grad_buffer()) v += g[0];
    });
  }
  return result;
}

Tensor mean(const Tensor& x) {
  if (x.size() == 0) throw ShapeError("mean of an empty tensor");
  return scale(sum(x), 1.0 / static_cast<double>(x.size()));
}

Tensor sum(const Tensor& x, int axis) {
  const std::size_t ax = normalize_axis(axis, x.rank());
  const AxisSplit s = split_axis(x.shape(), ax);
  Shape shape = x.shape();
  shape.erase(shape.begin() + static_cast<std::ptrdiff_t>(ax));
  Buffer out(s.outer * s.inner, 0.0);
  auto xv = x.data();
  for (std::size_t o = 0; o < s.outer; ++o) {
    for (std::size_t l = 0; l < s.len; ++l) {
      const double* src = xv.data() + (o * s.len + l) * s.inner;
      double* dst = out.data() + o * s.inner;
      for (std::size_t i = 0; i < s.inner; ++i) dst[i] += src[i];
    }
  }
  Tensor result = make_result(std::move(shape), std::move(out));
  if (needs_grad({&x})) {
    NodePtr xn = x.node();
    record("sum_axis", result, [xn, s](const Buffer& g) {
      auto& gx = xn->grad_buffer();
      for (std::size_t o = 0; o < s.outer; ++o) {
        for (std::size_t l = 0; l < s.len; ++l) {
          double* dst = gx.data() + (o * s.len + l) * s.inner;
          const double* src = g.data() + o * s.inner;
          for (std::size_t i = 0; i < s.inner; ++i) dst[i] += src[i];
        }
      }
    });
  }
  return result;
}

Tensor mean(const Tensor& x, int axis) {
  const std::size_t len = x.dim(axis);
  if (len == 0) throw ShapeError("mean over an empty axis");
  return scale(sum(x, axis), 1.0 / static_cast<double>(len));
}

Tensor softmax(const Tensor& x, int axis) {
  const std::size_t ax = normalize_axis(axis, x.rank());
  const AxisSplit s = split_axis(x.shape(), ax);
  auto xv = x.data();
  Buffer out(x.size());
  if (s.inner == 1) {
    using Row = Eigen::Map<const Eigen::ArrayXd>;
    using MutRow = Eigen::Map<Eigen::ArrayXd>;
    const auto len = static_cast<Eigen::Index>(s.len);
    for (std::size_t o = 0; o < s.outer; ++o) {
      Row row(xv.data() + o * s.len, len);
      MutRow dst(out.data() + o * s.len, len);
      dst = (row - row.maxCoeff()).exp();
      dst *= 1.0 / dst.sum();
    }
  }
  for (std::size_t o = 0; o < s.outer && s.inner != 1; ++o) {
    for (std::size_t i = 0; i < s.inner; ++i) {
      const std::size_t base = o * s.len * s.inner + i;
      double peak = -std::numeric_limits<double>::infinity();
      for (std::size_t l = 0; l < s.len; ++l) peak = std::max(peak, xv[base + l * s.inner]);
      double z = 0.0;
      for (std::size_t l = 0; l < s.len; ++l) {
        const double e = std::exp(xv[base + l * s.inner] - peak);
        out[base + l * s.inner] = e;
        z += e;
      }
      const double inv = 1.0 / z;
      for (std::size_t l = 0; l < s.len; ++l) out[base + l * s.inner] *= inv;
    }
  }
  Tensor result = make_result(x.shape(), std::move(out));
  if (needs_grad({&x})) {
    NodePtr xn = x.node();
    NodePtr yn = result.node();
    record("softmax", result, [xn, yn, s](const Buffer& g) {
      const Buffer& y = yn->data;
      auto& gx = xn->grad_buffer();
      if (s.inner == 1) {
        const auto len = static_cast<Eigen::Index>(s.len);
        for (std::size_t o = 0; o < s.outer; ++o) {
          Eigen::Map<const Eigen::ArrayXd> yr(y.data() + o * s.len, len);
          Eigen::Map<const Eigen::ArrayXd> gr(g.data() + o * s.len, len);
          Eigen::Map<Eigen::ArrayXd>(gx.data() + o * s.len, len) += yr * (gr - (gr * yr).sum());
        }
        return;
      }
      for (std::size_t o = 0; o < s.outer; ++o) {
        for (std::size_t i = 0; i < s.inner; ++i) {
          const std::size_t base = o * s.len * s.inner + i;
          double dot = 0.0;
          for (std::size_t l = 0; l < s.len; ++l) {
            const std::size_t j = base + l * s.inner;
            dot += g[j] * y[j];
          }
          for (std::size_t l = 0; l < s.len; ++l) {
            const std::size_t j = base + l * s.inner;
            gx[j] += y[j] * (g[j] - dot);
          }
        }
      }
    });
  }
  return result;
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps) {
  if (!(eps > 0.0)) throw ParameterError("layer_norm: eps must be positive");
  if (x.rank() < 1) throw ShapeError("layer_norm: needs at least one axis");
  const std::size_t d = x.dim(-1);
  if (gain.shape() != Shape{d} || bias.shape() != Shape{d}) {
    throw ShapeError("layer_norm: gain/bias " + shape_str(gain.shape()) + "/" +
                     shape_str(bias.shape()) + " do not match last axis of " +
                     shape_str(x.shape()));
  }
  const std::size_t rows = x.size() / std::max<std::size_t>(d, 1);
  auto xv = x.data();
  auto gv = gain.data();
  auto bv = bias.data();
  Buffer xhat(x.size());
  Buffer inv_std(rows);
  Buffer out(x.size());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = xv.data() + r * d;
    double mu = 0.0;
    for (std::size_t j = 0; j < d; ++j) mu += row[j];
    mu /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t j = 0; j < d; ++j) var += (row[j] - mu) * (row[j] - mu);
    var /= static_cast<double>(d);
    const double is = 1.0 / std::sqrt(var + eps);
    inv_std[r] = is;
    for (std::size_t j = 0; j < d; ++j) {
      const double h = (row[j] - mu) * is;
      xhat[r * d + j] = h;
      out[r * d + j] = h * gv[j] + bv[j];
    }
  }
  Tensor result = make_result(x.shape(), std::move(out));
  if (needs_grad({&x, &gain, &bias})) {
    NodePtr xn = x.node();
    NodePtr gn = gain.node();
    NodePtr bn = bias.node();
    record("layer_norm", result,
           [xn, gn, bn, rows, d, xhat = std::move(xhat),
            inv_std = std::move(inv_std)](const Buffer& g) {
             if (gn->requires_grad) {
               auto& gg = gn->grad_buffer();
               for (std::size_t r = 0; r < rows; ++r)
                 for (std::size_t j = 0; j < d; ++j) gg[j] += g[r * d + j] * xhat[r * d + j];
             }
             if (bn->requires_grad) {
               auto& gb = bn->grad_buffer();
               for (std::size_t r = 0; r < rows; ++r)
                 for (std::size_t j = 0; j < d; ++j) gb[j] += g[r * d + j];
             }
             if (xn->requires_grad) {
               auto& gx = xn->grad_buffer();
               const double inv_d = 1.0 / static_cast<double>(d);
               for (std::size_t r = 0; r < rows; ++r) {
                 double mean_dh = 0.0;
                 double mean_dh_h = 0.0;
                 for (std::size_t j = 0; j < d; ++j) {
                   const double dh = g[r * d + j] * gn->data[j];
                   mean_dh += dh;
                   mean_dh_h += dh * xhat[r * d + j];
                 }
                 mean_dh *= inv_d;
                 mean_dh_h *= inv_d;
                 for (std::size_t j = 0; j < d; ++j) {
                   const double dh = g[r * d + j] * gn->data[j];
                   gx[r * d + j] += inv_std[r] * (dh - mean_dh - xhat[r * d + j] * mean_dh_h);
                 }
               }
             }
           });
  }
  return result;
}

Tensor concat(const std::vector<Tensor>& parts, int axis) {
  if (parts.empty()) throw ShapeError("concat of zero tensors");
  const std::size_t ax = normalize_axis(axis, parts[0].rank());
  Shape shape = parts[0].shape();
  std::size_t total = 0;
  for (const Tensor& p : parts) {
    Shape probe = p.shape();
    if (probe.size() != shape.size()) {
      throw ShapeError("concat: rank mismatch between " + shape_str(shape) + " and " +
                       shape_str(probe));
    }
    probe[ax] = shape[ax];
    if (probe != shape) {
      throw ShapeError("concat: shapes " + shape_str(parts[0].shape()) + " and " +
                       shape_str(p.shape()) + " differ off axis " + std::to_string(ax));
    }
    total += p.shape()[ax];
  }
  shape[ax] = total;
  const AxisSplit s = split_axis(shape, ax);
  Buffer out(shape_numel(shape));
  std::vector<std::size_t> offsets;
  std::size_t offset = 0;
  for (const Tensor& p : parts) {
    offsets.push_back(offset);
    const std::size_t chunk = p.shape()[ax] * s.inner;
    auto pv = p.data();
    for (std::size_t o = 0; o < s.outer; ++o) {
      std::copy_n(pv.data() + o * chunk, chunk, out.data() + o * total * s.inner + offset);
    }
    offset += chunk;
  }
  Tensor result = make_result(std::move(shape), std::move(out));
  bool any = false;
  for (const Tensor& p : parts) any = any || needs_grad({&p});
  if (any) {
    std::vector<NodePtr> nodes;
    std::vector<std::size_t> chunks;
    for (const Tensor& p : parts) {
      nodes.push_back(p.node());
      chunks.push_back(p.shape()[ax] * s.inner);
    }
    const std::size_t row = total * s.inner;
    record("concat", result,
           [nodes = std::move(nodes), chunks = std::move(chunks), offsets = std::move(offsets),
            row, outer = s.outer](const Buffer& g) {
             for (std::size_t p = 0; p < nodes.size(); ++p) {
               if (!nodes[p]->requires_grad) continue;
               auto& gp = nodes[p]->grad_buffer();
               for (std::size_t o = 0; o < outer; ++o) {
                 const double* src = g.data() + o * row + offsets[p];
                 double* dst = gp.data() + o * chunks[p];
                 for (std::size_t i = 0; i < chunks[p]; ++i) dst[i] += src[i];
               }
             }
           });
  }
  return result;
}

Tensor slice(const Tensor& x, int axis, std::size_t begin, std::size_t end) {
  const std::size_t ax = normalize_axis(axis, x.rank());
  if (begin > end || end > x.shape()[ax]) {
    throw ShapeError("slice [" + std::to_string(begin) + ", " + std::to_string(end) +
                     ") out of range for axis " + std::to_string(ax) + " of " +
                     shape_str(x.shape()));
  }
  const AxisSplit s = split_axis(x.shape(), ax);
  Shape shape = x.shape();
  shape[ax] = end - begin;
  const std::size_t chunk = (end - begin) * s.inner;
  const std::size_t row = s.len * s.inner;
  const std::size_t first = begin * s.inner;
  Buffer out(s.outer * chunk);
  auto xv = x.data();
  for (std::size_t o = 0; o < s.outer; ++o) {
    std::copy_n(xv.data() + o * row + first, chunk, out.data() + o * chunk);
  }
  Tensor result = make_result(std::move(shape), std::move(out));
  if (needs_grad({&x})) {
    NodePtr xn = x.node();
    record("slice", result, [xn, outer = s.outer, chunk, row, first](const Buffer& g) {
      auto& gx = xn->grad_buffer();
      for (std::size_t o = 0; o < outer; ++o) {
        for (std::size_t i = 0; i < chunk; ++i) gx[o * row + first + i] += g[o * chunk + i];
      }
    });
  }
  return result;
}

Tensor reshape(const Tensor& x, Shape shape) {
  if (shape_numel(shape) != x.size()) {
    throw ShapeError("reshape: cannot view " + shape_str(x.shape()) + " as " + shape_str(shape));
  }
  auto xv = x.data();
  Tensor result = make_result(std::move(shape), Buffer(xv.begin(), xv.end()));
  if (needs_grad({&x})) {
    NodePtr xn = x.node();
    record("reshape", result, [xn](const Buffer& g) {
      auto& gx = xn->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
    });
  }
  return result;
}

namespace {

// Walks the output of a permutation in row-major order; fn(out_offset,
// in_offset, run) handles `run` consecutive outputs whose inputs are spaced
// by the stride of the last output axis.
template <class Fn>
void permute_walk(const Shape& shape, const std::vector<std::size_t>& stride, Fn fn) {
  const std::size_t r = shape.size();
  const std::size_t run = shape[r - 1];
  const std::size_t n = shape_numel(shape);
  if (n == 0) return;
  std::vector<std::size_t> index(r, 0);
  std::size_t src = 0;
  for (std::size_t dst = 0; dst < n; dst += run) {
    fn(dst, src, run);
    for (std::size_t i = r - 1; i-- > 0;) {
      src += stride[i];
      if (++index[i] < shape[i]) break;
      src -= stride[i] * shape[i];
      index[i] = 0;
    }
  }
}

}  // namespace

Tensor permute(const Tensor& x, const std::vector<std::size_t>& axes) {
  const std::size_t r = x.rank();
  if (axes.size() != r) throw ShapeError("permute: axes/rank mismatch for " + shape_str(x.shape()));
  std::vector<bool> seen(r, false);
  for (std::size_t a : axes) {
    if (a >= r || seen[a]) throw ShapeError("permute: invalid axis list");
    seen[a] = true;
  }
  if (r == 0) return reshape(x, x.shape());
  const Shape& in_shape = x.shape();
  std::vector<std::size_t> in_stride(r, 1);
  for (std::size_t i = r; i-- > 1;) in_stride[i - 1] = in_stride[i] * in_shape[i];
  Shape shape(r);
  std::vector<std::size_t> stride(r);
  for (std::size_t i = 0; i < r; ++i) {
    shape[i] = in_shape[axes[i]];
    stride[i] = in_stride[axes[i]];
  }
  const double* xv = x.data().data();
  Buffer out(x.size());
  const std::size_t step = stride[r - 1];
  permute_walk(shape, stride, [&](std::size_t dst, std::size_t src, std::size_t run) {
    for (std::size_t j = 0; j < run; ++j) out[dst + j] = xv[src + j * step];
  });
  Tensor result = make_result(shape, std::move(out));
  if (needs_grad({&x})) {
    NodePtr xn = x.node();
    record("permute", result, [xn, shape, stride, step](const Buffer& g) {
      double* gx = xn->grad_buffer().data();
      permute_walk(shape, stride, [&](std::size_t dst, std::size_t src, std::size_t run) {
        for (std::size_t j = 0; j < run; ++j) gx[src + j * step] += g[dst + j];
      });
    });
  }
  return result;
}

Tensor transpose(const Tensor& x) {
  if (x.rank() < 2) throw ShapeError("transpose needs rank >= 2, got " + shape_str(x.shape()));
  std::vector<std::size_t> axes(x.rank());
  std::iota(axes.begin(), axes.end(), 0);
  std::swap(axes[x.rank() - 1], axes[x.rank() - 2]);
  return permute(x, axes);
}

}  // namespace disk::ops
