#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <memory>
#include <new>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace disk {

using Shape = std::vector<std::size_t>;

// 64-byte aligned storage. Vectorized kernels peel a scalar prologue up to
// the first aligned element, so results would otherwise depend on where the
// allocator happened to place a buffer.
template <class T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t kAlign{64};

  AlignedAllocator() = default;
  template <class U>
  AlignedAllocator(const AlignedAllocator<U>&) {}

  T* allocate(std::size_t n) { return static_cast<T*>(::operator new(n * sizeof(T), kAlign)); }
  void deallocate(T* p, std::size_t) { ::operator delete(p, kAlign); }

  template <class U>
  bool operator==(const AlignedAllocator<U>&) const { return true; }
};

using Buffer = std::vector<double, AlignedAllocator<double>>;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

namespace detail {

struct Node {
  Shape shape;
  Buffer data;
  Buffer grad;  // empty until the first adjoint lands here
  bool requires_grad = false;

  Buffer& grad_buffer();
};

}  // namespace detail

// Dense row-major float64 array with an optional gradient slot.
//
// Tensor is a shared handle: copies alias the same buffer. Operations in
// ops.hpp never mutate their inputs; they allocate a fresh output and, when
// any input requires a gradient, append an adjoint rule to the thread's Tape.
class Tensor {
 public:
  Tensor();

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor from(Shape shape, std::vector<double> values,
                     bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  const Shape& shape() const { return node_->shape; }
  std::size_t rank() const { return node_->shape.size(); }
  std::size_t size() const { return node_->data.size(); }
  // Negative axes count from the back.
  std::size_t dim(int axis) const;

  std::span<const double> data() const { return node_->data; }
  // Only sensible on leaves (parameters, inputs); writing into an
  // intermediate that the tape still references corrupts its adjoints.
  std::span<double> mutable_data() { return node_->data; }

  double item() const;
  double operator[](std::size_t flat_index) const { return node_->data[flat_index]; }
  double at(std::initializer_list<std::size_t> index) const;

  bool requires_grad() const { return node_->requires_grad; }
  void set_requires_grad(bool value) { node_->requires_grad = value; }

  bool has_grad() const { return !node_->grad.empty(); }
  // All zeros when no adjoint has reached this tensor.
  std::vector<double> grad() const;
  void zero_grad() { node_->grad.clear(); }

  // Copy of the values, disconnected from any recorded computation.
  Tensor detach() const;
  bool same_node(const Tensor& other) const { return node_ == other.node_; }

  const std::shared_ptr<detail::Node>& node() const { return node_; }

 private:
  explicit Tensor(std::shared_ptr<detail::Node> node);
  std::shared_ptr<detail::Node> node_;

  friend Tensor make_result(Shape shape, Buffer values);
};

// Builds an op output from freshly computed values; checks finiteness.
Tensor make_result(Shape shape, Buffer values);

// Thread-confined record of executed primitives. Each entry carries the
// closure that pushes the output adjoint back into the inputs.
class Tape {
 public:
  struct Record {
    std::string_view op;
    std::function<void()> adjoint;
  };

  static Tape& current();

  void push(std::string_view op, std::function<void()> adjoint);
  std::size_t size() const { return records_.size(); }
  std::vector<std::string_view> op_names() const;
  void clear() { records_.clear(); }

  bool enabled() const { return enabled_ > 0; }

 private:
  friend class NoGradGuard;
  friend struct BackwardReport backward(const Tensor& loss);

  std::vector<Record> records_;
  int enabled_ = 1;
};

// Suspends recording for its lifetime (inference, evaluation).
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;
};

struct BackwardReport {
  std::size_t operations_visited = 0;
};

// Seeds d(loss)/d(loss) = 1, replays the tape in reverse and clears it.
// Gradients accumulate into every requires_grad leaf reachable from loss.
BackwardReport backward(const Tensor& loss);

// True when an output of these inputs needs an adjoint rule.
bool needs_grad(std::initializer_list<const Tensor*> inputs);

// Keeps large freed buffers inside the process heap instead of returning them
// to the OS; per-op temporaries otherwise page-fault on every step. Idempotent.
void tune_allocator();

}  // namespace disk
