#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace c2s2 {

using Shape = std::vector<int64_t>;

int64_t shape_numel(const Shape& s);
std::string shape_str(const Shape& s);

struct ShapeError : std::runtime_error {
  explicit ShapeError(const std::string& msg) : std::runtime_error(msg) {}
};

struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

class Tensor;

namespace detail {

// One tape node. The inputs keep the upstream graph alive until backward()
// has run and the root is dropped; leaves have no inputs and no backward_fn.
struct TensorNode {
  Shape shape;
  std::vector<double> data;
  std::vector<double> grad;  // empty until a gradient is accumulated
  bool requires_grad = false;
  std::vector<Tensor> inputs;
  std::function<void(TensorNode&)> backward_fn;
  const char* op = "leaf";
};

// Returns the gradient buffer of t (allocating zeros on first use), or
// nullptr when t does not require grad.
double* grad_ptr(const Tensor& t);

}  // namespace detail

// Value-semantic handle to a tape node. Copies share the node.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape s, bool requires_grad = false);
  static Tensor full(Shape s, double v, bool requires_grad = false);
  static Tensor from_data(Shape s, std::vector<double> d, bool requires_grad = false);

  // Op outputs: requires_grad is implied by a non-null backward_fn, and
  // inputs are retained only in that case.
  static Tensor make_op(Shape s, std::vector<double> d, std::vector<Tensor> inputs,
                        std::function<void(detail::TensorNode&)> backward_fn,
                        const char* op);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const;
  int64_t numel() const;
  int64_t dim(size_t i) const;
  bool requires_grad() const;

  const std::vector<double>& data() const;
  // For leaves only (parameter updates between steps); never mutate a value
  // already consumed by a tape.
  std::vector<double>& mutable_data();

  bool has_grad() const;
  const std::vector<double>& grad() const;
  void zero_grad();

  double item() const;

  // Reverse-mode sweep from a scalar root. Visits each reachable node once,
  // in reverse topological order.
  void backward();

  detail::TensorNode* node() const { return node_.get(); }

 private:
  std::shared_ptr<detail::TensorNode> node_;
};

void assert_all_finite(const Tensor& t, const std::string& context);

}  // namespace c2s2
