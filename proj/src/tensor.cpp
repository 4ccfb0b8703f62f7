#include "c2s2/tensor.hpp"

#include <cmath>
#include <sstream>
#include <unordered_set>
#include <utility>

namespace c2s2 {

int64_t shape_numel(const Shape& s) {
  int64_t n = 1;
  for (int64_t d : s) n *= d;
  return n;
}

std::string shape_str(const Shape& s) {
  std::ostringstream os;
  os << "[";
  for (size_t i = 0; i < s.size(); ++i) {
    if (i) os << ",";
    os << s[i];
  }
  os << "]";
  return os.str();
}

namespace detail {

double* grad_ptr(const Tensor& t) {
  TensorNode* n = t.node();
  if (n == nullptr || !n->requires_grad) return nullptr;
  if (n->grad.empty()) n->grad.assign(static_cast<size_t>(shape_numel(n->shape)), 0.0);
  return n->grad.data();
}

}  // namespace detail

Tensor Tensor::zeros(Shape s, bool requires_grad) {
  return from_data(std::move(s), {}, requires_grad);
}

Tensor Tensor::full(Shape s, double v, bool requires_grad) {
  std::vector<double> d(static_cast<size_t>(shape_numel(s)), v);
  return from_data(std::move(s), std::move(d), requires_grad);
}

Tensor Tensor::from_data(Shape s, std::vector<double> d, bool requires_grad) {
  const int64_t n = shape_numel(s);
  for (int64_t dim : s) {
    if (dim <= 0) throw ShapeError("tensor: non-positive dimension in shape " + shape_str(s));
  }
  if (d.empty()) d.assign(static_cast<size_t>(n), 0.0);
  if (static_cast<int64_t>(d.size()) != n) {
    throw ShapeError("tensor: data length " + std::to_string(d.size()) +
                     " does not match shape " + shape_str(s));
  }
  Tensor t;
  t.node_ = std::make_shared<detail::TensorNode>();
  t.node_->shape = std::move(s);
  t.node_->data = std::move(d);
  t.node_->requires_grad = requires_grad;
  return t;
}

Tensor Tensor::make_op(Shape s, std::vector<double> d, std::vector<Tensor> inputs,
                       std::function<void(detail::TensorNode&)> backward_fn,
                       const char* op) {
  Tensor t = from_data(std::move(s), std::move(d), backward_fn != nullptr);
  t.node_->op = op;
  if (backward_fn) {
    t.node_->inputs = std::move(inputs);
    t.node_->backward_fn = std::move(backward_fn);
  }
  return t;
}

const Shape& Tensor::shape() const {
  if (!node_) throw ShapeError("tensor: use of undefined tensor");
  return node_->shape;
}

int64_t Tensor::numel() const { return shape_numel(shape()); }

int64_t Tensor::dim(size_t i) const {
  const Shape& s = shape();
  if (i >= s.size()) throw ShapeError("tensor: dim index out of range for " + shape_str(s));
  return s[i];
}

bool Tensor::requires_grad() const { return node_ && node_->requires_grad; }

const std::vector<double>& Tensor::data() const {
  if (!node_) throw ShapeError("tensor: use of undefined tensor");
  return node_->data;
}

std::vector<double>& Tensor::mutable_data() {
  if (!node_) throw ShapeError("tensor: use of undefined tensor");
  return node_->data;
}

bool Tensor::has_grad() const { return node_ && !node_->grad.empty(); }

const std::vector<double>& Tensor::grad() const {
  if (!has_grad()) throw NumericError("tensor: gradient not available");
  return node_->grad;
}

void Tensor::zero_grad() {
  if (node_) node_->grad.clear();
}

double Tensor::item() const {
  if (numel() != 1) throw ShapeError("tensor: item() on non-scalar " + shape_str(shape()));
  return data()[0];
}

void Tensor::backward() {
  if (!node_) throw ShapeError("tensor: backward on undefined tensor");
  if (numel() != 1) throw ShapeError("tensor: backward root must be scalar, got " + shape_str(shape()));

  // Iterative post-order DFS; visited-set guarantees each node is expanded
  // exactly once even in diamond-shaped graphs.
  std::vector<detail::TensorNode*> order;
  std::unordered_set<detail::TensorNode*> visited;
  std::vector<std::pair<detail::TensorNode*, size_t>> stack;
  stack.emplace_back(node_.get(), 0);
  visited.insert(node_.get());
  while (!stack.empty()) {
    auto& top = stack.back();
    if (top.second < top.first->inputs.size()) {
      detail::TensorNode* child = top.first->inputs[top.second].node();
      ++top.second;
      if (child != nullptr && visited.insert(child).second) {
        stack.emplace_back(child, 0);
      }
    } else {
      order.push_back(top.first);
      stack.pop_back();
    }
  }

  node_->grad.assign(1, 1.0);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    detail::TensorNode* n = *it;
    if (n->backward_fn && !n->grad.empty()) n->backward_fn(*n);
  }
}

void assert_all_finite(const Tensor& t, const std::string& context) {
  for (double v : t.data()) {
    if (!std::isfinite(v)) {
      throw NumericError(context + ": non-finite value encountered");
    }
  }
}

}  // namespace c2s2
