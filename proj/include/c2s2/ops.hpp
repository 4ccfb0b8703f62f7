#pragma once

#include <map>
#include <string>
#include <vector>

#include "c2s2/tensor.hpp"

namespace c2s2::ops {

// 2-D cross-correlation over NCHW input with [Co,Ci,K,K] kernels. Pass an
// undefined Tensor for bias to omit it. Output H' = (H+2p-k)/stride + 1.
Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& b, int stride, int padding);

// Per-channel scaling of an NCHW tensor by a length-C weight vector; the
// forward primitive of the pruning layer. weights == 1 is a bitwise identity.
Tensor channel_scale(const Tensor& x, const Tensor& weights);

struct BatchNormState {
  std::vector<double> running_mean;
  std::vector<double> running_var;
};

// Training mode normalizes with batch statistics (and optionally folds them
// into the running estimates); eval mode uses the running estimates.
// Gradients are defined in both modes.
Tensor batchnorm2d(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                   BatchNormState& state, bool training, bool update_running_stats,
                   double momentum = 0.1, double eps = 1e-5);

Tensor relu(const Tensor& x);

Tensor maxpool2d(const Tensor& x, int kernel, int stride);

// NCHW -> [N,C] spatial mean.
Tensor global_avgpool(const Tensor& x);

// x[N,in] * w[out,in]^T + b[out].
Tensor dense(const Tensor& x, const Tensor& w, const Tensor& b);

// Mean cross entropy of softmax(logits[N,K]) against integer labels.
Tensor softmax_cross_entropy(const Tensor& logits, const std::vector<int>& labels);

Tensor add(const Tensor& a, const Tensor& b);

Tensor scale(const Tensor& a, double c);

// sum_i |p_i|; subgradient at 0 is 0.
Tensor l1_norm(const Tensor& p);

// sum_i |p_i (1 - p_i)|. Gradient (1-2p)*sign(p(1-p)) with sign(0)=0, so the
// penalty is stationary exactly at p in {0,1}.
Tensor bipolar_norm(const Tensor& p);

std::vector<int> argmax_rows(const Tensor& logits);

// Momentum SGD update for a single parameter. With momentum > 0 the velocity
// vector is updated in place (v <- m*v + g; p <- p - lr*v). Non-finite
// gradients abort, naming the parameter.
void sgd_step(const std::string& name, Tensor& param, std::vector<double>& velocity,
              double learning_rate, double momentum);

// Velocity bookkeeping for a set of named parameters.
class Sgd {
 public:
  Sgd(double learning_rate, double momentum) : lr_(learning_rate), momentum_(momentum) {}

  void step(const std::string& name, Tensor& param);
  void set_learning_rate(double lr) { lr_ = lr; }
  double learning_rate() const { return lr_; }

 private:
  double lr_;
  double momentum_;
  std::map<std::string, std::vector<double>> velocity_;
};

}  // namespace c2s2::ops
