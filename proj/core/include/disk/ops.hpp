#pragma once

#include <cstddef>
#include <vector>

#include "disk/tensor.hpp"

// Differentiable primitives. Binary elementwise ops accept equal shapes or an
// operand whose shape is a suffix of the other's (broadcast over leading
// dimensions only).
namespace disk::ops {

// [..., m, k] x [..., k, n]. Batch dims must match, or one side is plain 2-D.
Tensor matmul(const Tensor& a, const Tensor& b);
// x [..., k] . w [k, n] + bias [n]
Tensor linear(const Tensor& x, const Tensor& w, const Tensor& bias);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& x, double factor);
Tensor add_scalar(const Tensor& x, double offset);
Tensor neg(const Tensor& x);

Tensor gelu(const Tensor& x);
Tensor sin(const Tensor& x);
Tensor cos(const Tensor& x);
Tensor exp(const Tensor& x);
Tensor log(const Tensor& x);
Tensor sigmoid(const Tensor& x);
// Gradient passes only where lo < x < hi.
Tensor clamp(const Tensor& x, double lo, double hi);

Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);
// Reduces one axis away.
Tensor sum(const Tensor& x, int axis);
Tensor mean(const Tensor& x, int axis);

Tensor softmax(const Tensor& x, int axis);
// Normalizes the last axis, then applies gain and bias (both [last]).
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias,
                  double eps = 1e-5);

Tensor concat(const std::vector<Tensor>& parts, int axis);
Tensor slice(const Tensor& x, int axis, std::size_t begin, std::size_t end);
Tensor reshape(const Tensor& x, Shape shape);
Tensor permute(const Tensor& x, const std::vector<std::size_t>& axes);
// Swaps the last two axes.
Tensor transpose(const Tensor& x);

}  // namespace disk::ops
