#include "disk/tensor.hpp"

#include <Eigen/Core>
#include <malloc.h>

#include <cmath>
#include <sstream>

#include "disk/error.hpp"

namespace disk {

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out << ", ";
    out << shape[i];
  }
  out << ']';
  return out.str();
}

Buffer& detail::Node::grad_buffer() {
  if (grad.empty()) grad.assign(data.size(), 0.0);
  return grad;
}

Tensor::Tensor() : node_(std::make_shared<detail::Node>()) {}

Tensor::Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  return full(std::move(shape), 0.0, requires_grad);
}

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
  auto node = std::make_shared<detail::Node>();
  node->data.assign(shape_numel(shape), value);
  node->shape = std::move(shape);
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

Tensor Tensor::from(Shape shape, std::vector<double> values, bool requires_grad) {
  if (shape_numel(shape) != values.size()) {
    throw ShapeError("tensor of shape " + shape_str(shape) + " cannot hold " +
                     std::to_string(values.size()) + " values");
  }
  Tensor t = make_result(std::move(shape), Buffer(values.begin(), values.end()));
  t.node_->requires_grad = requires_grad;
  return t;
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return from({}, {value}, requires_grad);
}

std::size_t Tensor::dim(int axis) const {
  const int r = static_cast<int>(rank());
  const int a = axis < 0 ? axis + r : axis;
  if (a < 0 || a >= r) {
    throw ShapeError("axis " + std::to_string(axis) + " out of range for shape " +
                     shape_str(shape()));
  }
  return node_->shape[static_cast<std::size_t>(a)];
}

double Tensor::item() const {
  if (size() != 1) {
    throw ShapeError("item() on tensor of shape " + shape_str(shape()));
  }
  return node_->data[0];
}

double Tensor::at(std::initializer_list<std::size_t> index) const {
  if (index.size() != rank()) {
    throw ShapeError("index rank mismatch for shape " + shape_str(shape()));
  }
  std::size_t flat = 0;
  std::size_t axis = 0;
  for (std::size_t i : index) {
    if (i >= node_->shape[axis]) throw ShapeError("index out of bounds");
    flat = flat * node_->shape[axis] + i;
    ++axis;
  }
  return node_->data[flat];
}

std::vector<double> Tensor::grad() const {
  if (node_->grad.empty()) return std::vector<double>(size(), 0.0);
  return {node_->grad.begin(), node_->grad.end()};
}

Tensor Tensor::detach() const {
  return make_result(node_->shape, node_->data);
}

Tensor make_result(Shape shape, Buffer values) {
  const auto n = static_cast<Eigen::Index>(values.size());
  if (!Eigen::Map<const Eigen::ArrayXd>(values.data(), n).allFinite()) {
    throw NumericalError("non-finite value in tensor of shape " + shape_str(shape));
  }
  auto node = std::make_shared<detail::Node>();
  node->shape = std::move(shape);
  node->data = std::move(values);
  return Tensor(std::move(node));
}

Tape& Tape::current() {
  thread_local Tape tape;
  return tape;
}

void Tape::push(std::string_view op, std::function<void()> adjoint) {
  records_.push_back(Record{op, std::move(adjoint)});
}

std::vector<std::string_view> Tape::op_names() const {
  std::vector<std::string_view> names;
  names.reserve(records_.size());
  for (const auto& r : records_) names.push_back(r.op);
  return names;
}

NoGradGuard::NoGradGuard() { --Tape::current().enabled_; }
NoGradGuard::~NoGradGuard() { ++Tape::current().enabled_; }

bool needs_grad(std::initializer_list<const Tensor*> inputs) {
  if (!Tape::current().enabled()) return false;
  for (const Tensor* t : inputs) {
    if (t->requires_grad()) return true;
  }
  return false;
}

BackwardReport backward(const Tensor& loss) {
  if (loss.size() != 1) {
    throw ShapeError("backward() needs a scalar loss, got shape " + shape_str(loss.shape()));
  }
  if (!loss.requires_grad()) {
    throw ParameterError("backward() on a loss that was not produced by recorded operations");
  }
  Tape& tape = Tape::current();
  loss.node()->grad_buffer()[0] += 1.0;

  BackwardReport report;
  // Move the records out first so adjoints cannot observe a half-cleared tape.
  std::vector<Tape::Record> records = std::move(tape.records_);
  tape.records_.clear();
  for (auto it = records.rbegin(); it != records.rend(); ++it) {
    it->adjoint();
    ++report.operations_visited;
  }
  return report;
}

void tune_allocator() {
  mallopt(M_MMAP_THRESHOLD, 32 * 1024 * 1024);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);
  mallopt(M_TOP_PAD, 64 * 1024 * 1024);
}

}  // namespace disk
