#include "c2s2/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace c2s2::ops {

namespace {

void check(bool cond, const std::string& msg) {
  if (!cond) throw ShapeError(msg);
}

double sign0(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

}  // namespace

Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& b, int stride, int padding) {
  check(x.defined() && x.shape().size() == 4,
        "conv2d: input must be 4-D [N,C,H,W], got " + (x.defined() ? shape_str(x.shape()) : "undefined"));
  check(w.defined() && w.shape().size() == 4,
        "conv2d: kernels must be 4-D [Co,Ci,K,K], got " + (w.defined() ? shape_str(w.shape()) : "undefined"));
  check(stride >= 1, "conv2d: stride must be >= 1");
  check(padding >= 0, "conv2d: padding must be >= 0");

  const int64_t N = x.dim(0), Ci = x.dim(1), H = x.dim(2), W = x.dim(3);
  const int64_t Co = w.dim(0), K = w.dim(2);
  check(w.dim(2) == w.dim(3), "conv2d: kernels must be square, got " + shape_str(w.shape()));
  check(w.dim(1) == Ci, "conv2d: kernel depth " + std::to_string(w.dim(1)) +
                            " does not match input channels " + std::to_string(Ci));
  check(K <= H + 2 * padding && K <= W + 2 * padding,
        "conv2d: kernel size " + std::to_string(K) + " exceeds padded input " + shape_str(x.shape()));
  if (b.defined()) {
    check(b.shape() == Shape{Co}, "conv2d: bias shape " + shape_str(b.shape()) +
                                      " does not match output channels " + std::to_string(Co));
  }

  const int64_t Ho = (H + 2 * padding - K) / stride + 1;
  const int64_t Wo = (W + 2 * padding - K) / stride + 1;

  std::vector<double> out(static_cast<size_t>(N * Co * Ho * Wo));
  const double* xd = x.data().data();
  const double* wd = w.data().data();
  const double* bd = b.defined() ? b.data().data() : nullptr;

  for (int64_t n = 0; n < N; ++n) {
    for (int64_t co = 0; co < Co; ++co) {
      for (int64_t ho = 0; ho < Ho; ++ho) {
        for (int64_t wo = 0; wo < Wo; ++wo) {
          double acc = bd ? bd[co] : 0.0;
          for (int64_t ci = 0; ci < Ci; ++ci) {
            for (int64_t kh = 0; kh < K; ++kh) {
              const int64_t hi = ho * stride - padding + kh;
              if (hi < 0 || hi >= H) continue;
              for (int64_t kw = 0; kw < K; ++kw) {
                const int64_t wi = wo * stride - padding + kw;
                if (wi < 0 || wi >= W) continue;
                acc += xd[((n * Ci + ci) * H + hi) * W + wi] * wd[((co * Ci + ci) * K + kh) * K + kw];
              }
            }
          }
          out[((n * Co + co) * Ho + ho) * Wo + wo] = acc;
        }
      }
    }
  }

  const bool rg = x.requires_grad() || w.requires_grad() || (b.defined() && b.requires_grad());
  if (!rg) return Tensor::make_op({N, Co, Ho, Wo}, std::move(out), {}, nullptr, "conv2d");

  Tensor xt = x, wt = w, bt = b;
  const int s = stride, p = padding;
  auto backward = [xt, wt, bt, N, Ci, H, W, Co, K, Ho, Wo, s, p](detail::TensorNode& self) {
    const double* go = self.grad.data();
    double* gx = detail::grad_ptr(xt);
    double* gw = detail::grad_ptr(wt);
    double* gb = bt.defined() ? detail::grad_ptr(bt) : nullptr;
    const double* xd = xt.data().data();
    const double* wd = wt.data().data();
    for (int64_t n = 0; n < N; ++n) {
      for (int64_t co = 0; co < Co; ++co) {
        for (int64_t ho = 0; ho < Ho; ++ho) {
          for (int64_t wo = 0; wo < Wo; ++wo) {
            const double g = go[((n * Co + co) * Ho + ho) * Wo + wo];
            if (gb) gb[co] += g;
            if (!gx && !gw) continue;
            for (int64_t ci = 0; ci < Ci; ++ci) {
              for (int64_t kh = 0; kh < K; ++kh) {
                const int64_t hi = ho * s - p + kh;
                if (hi < 0 || hi >= H) continue;
                for (int64_t kw = 0; kw < K; ++kw) {
                  const int64_t wi = wo * s - p + kw;
                  if (wi < 0 || wi >= W) continue;
                  const size_t xi = ((n * Ci + ci) * H + hi) * W + wi;
                  const size_t wix = ((co * Ci + ci) * K + kh) * K + kw;
                  if (gx) gx[xi] += g * wd[wix];
                  if (gw) gw[wix] += g * xd[xi];
                }
              }
            }
          }
        }
      }
    }
  };
  std::vector<Tensor> inputs = {x, w};
  if (b.defined()) inputs.push_back(b);
  return Tensor::make_op({N, Co, Ho, Wo}, std::move(out), std::move(inputs), backward, "conv2d");
}

Tensor channel_scale(const Tensor& x, const Tensor& weights) {
  check(x.defined() && x.shape().size() == 4,
        "channel_scale: input must be 4-D [N,C,H,W], got " + (x.defined() ? shape_str(x.shape()) : "undefined"));
  check(weights.defined() && weights.shape().size() == 1,
        "channel_scale: weights must be 1-D");
  const int64_t N = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  check(weights.dim(0) == C, "channel_scale: weight length " + std::to_string(weights.dim(0)) +
                                 " does not match channel count " + std::to_string(C));

  std::vector<double> out(static_cast<size_t>(N * C * H * W));
  const double* xd = x.data().data();
  const double* wd = weights.data().data();
  const int64_t hw = H * W;
  for (int64_t n = 0; n < N; ++n) {
    for (int64_t c = 0; c < C; ++c) {
      const double wc = wd[c];
      const size_t base = static_cast<size_t>((n * C + c) * hw);
      for (int64_t i = 0; i < hw; ++i) out[base + i] = xd[base + i] * wc;
    }
  }

  const bool rg = x.requires_grad() || weights.requires_grad();
  if (!rg) return Tensor::make_op(x.shape(), std::move(out), {}, nullptr, "channel_scale");

  Tensor xt = x, wt = weights;
  auto backward = [xt, wt, N, C, hw](detail::TensorNode& self) {
    const double* go = self.grad.data();
    double* gx = detail::grad_ptr(xt);
    double* gw = detail::grad_ptr(wt);
    const double* xd = xt.data().data();
    const double* wd = wt.data().data();
    for (int64_t n = 0; n < N; ++n) {
      for (int64_t c = 0; c < C; ++c) {
        const size_t base = static_cast<size_t>((n * C + c) * hw);
        double acc = 0.0;
        for (int64_t i = 0; i < hw; ++i) {
          if (gx) gx[base + i] += go[base + i] * wd[c];
          acc += go[base + i] * xd[base + i];
        }
        if (gw) gw[c] += acc;
      }
    }
  };
  return Tensor::make_op(x.shape(), std::move(out), {x, weights}, backward, "channel_scale");
}

Tensor batchnorm2d(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                   BatchNormState& state, bool training, bool update_running_stats,
                   double momentum, double eps) {
  check(x.defined() && x.shape().size() == 4, "batchnorm2d: input must be 4-D [N,C,H,W]");
  const int64_t N = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  check(gamma.shape() == Shape{C} && beta.shape() == Shape{C},
        "batchnorm2d: gamma/beta must have length " + std::to_string(C));
  check(static_cast<int64_t>(state.running_mean.size()) == C &&
            static_cast<int64_t>(state.running_var.size()) == C,
        "batchnorm2d: running stats must have length " + std::to_string(C));

  const int64_t hw = H * W;
  const int64_t m = N * hw;
  const double* xd = x.data().data();
  const double* gd = gamma.data().data();
  const double* bd = beta.data().data();

  std::vector<double> mean(C), inv(C);
  if (training) {
    for (int64_t c = 0; c < C; ++c) {
      double s = 0.0;
      for (int64_t n = 0; n < N; ++n) {
        const size_t base = static_cast<size_t>((n * C + c) * hw);
        for (int64_t i = 0; i < hw; ++i) s += xd[base + i];
      }
      const double mu = s / static_cast<double>(m);
      double v = 0.0;
      for (int64_t n = 0; n < N; ++n) {
        const size_t base = static_cast<size_t>((n * C + c) * hw);
        for (int64_t i = 0; i < hw; ++i) {
          const double d = xd[base + i] - mu;
          v += d * d;
        }
      }
      const double var = v / static_cast<double>(m);  // biased, as used for normalization
      mean[c] = mu;
      inv[c] = 1.0 / std::sqrt(var + eps);
      if (update_running_stats) {
        state.running_mean[c] = (1.0 - momentum) * state.running_mean[c] + momentum * mu;
        state.running_var[c] = (1.0 - momentum) * state.running_var[c] + momentum * var;
      }
    }
  } else {
    for (int64_t c = 0; c < C; ++c) {
      mean[c] = state.running_mean[c];
      inv[c] = 1.0 / std::sqrt(state.running_var[c] + eps);
    }
  }

  std::vector<double> out(static_cast<size_t>(N * C * hw));
  for (int64_t n = 0; n < N; ++n) {
    for (int64_t c = 0; c < C; ++c) {
      const size_t base = static_cast<size_t>((n * C + c) * hw);
      for (int64_t i = 0; i < hw; ++i) {
        out[base + i] = gd[c] * (xd[base + i] - mean[c]) * inv[c] + bd[c];
      }
    }
  }

  const bool rg = x.requires_grad() || gamma.requires_grad() || beta.requires_grad();
  if (!rg) return Tensor::make_op(x.shape(), std::move(out), {}, nullptr, "batchnorm2d");

  Tensor xt = x, gt = gamma, bt = beta;
  auto backward = [xt, gt, bt, mean, inv, N, C, hw, m, training](detail::TensorNode& self) {
    const double* go = self.grad.data();
    double* gx = detail::grad_ptr(xt);
    double* gg = detail::grad_ptr(gt);
    double* gb = detail::grad_ptr(bt);
    const double* xd = xt.data().data();
    const double* gd = gt.data().data();
    for (int64_t c = 0; c < C; ++c) {
      double sum_go = 0.0, sum_go_xhat = 0.0;
      for (int64_t n = 0; n < N; ++n) {
        const size_t base = static_cast<size_t>((n * C + c) * hw);
        for (int64_t i = 0; i < hw; ++i) {
          const double xhat = (xd[base + i] - mean[c]) * inv[c];
          sum_go += go[base + i];
          sum_go_xhat += go[base + i] * xhat;
        }
      }
      if (gb) gb[c] += sum_go;
      if (gg) gg[c] += sum_go_xhat;
      if (gx) {
        const double scale = gd[c] * inv[c];
        if (training) {
          // d/dx of batch-statistics normalization
          const double mg = sum_go / static_cast<double>(m);
          const double mgx = sum_go_xhat / static_cast<double>(m);
          for (int64_t n = 0; n < N; ++n) {
            const size_t base = static_cast<size_t>((n * C + c) * hw);
            for (int64_t i = 0; i < hw; ++i) {
              const double xhat = (xd[base + i] - mean[c]) * inv[c];
              gx[base + i] += scale * (go[base + i] - mg - xhat * mgx);
            }
          }
        } else {
          for (int64_t n = 0; n < N; ++n) {
            const size_t base = static_cast<size_t>((n * C + c) * hw);
            for (int64_t i = 0; i < hw; ++i) gx[base + i] += scale * go[base + i];
          }
        }
      }
    }
  };
  return Tensor::make_op(x.shape(), std::move(out), {x, gamma, beta}, backward, "batchnorm2d");
}

Tensor relu(const Tensor& x) {
  check(x.defined(), "relu: undefined input");
  std::vector<double> out(x.data().size());
  const double* xd = x.data().data();
  for (size_t i = 0; i < out.size(); ++i) out[i] = xd[i] > 0.0 ? xd[i] : 0.0;

  if (!x.requires_grad()) return Tensor::make_op(x.shape(), std::move(out), {}, nullptr, "relu");
  Tensor xt = x;
  auto backward = [xt](detail::TensorNode& self) {
    double* gx = detail::grad_ptr(xt);
    if (!gx) return;
    const double* go = self.grad.data();
    const double* xd = xt.data().data();
    for (size_t i = 0; i < self.grad.size(); ++i) {
      if (xd[i] > 0.0) gx[i] += go[i];
    }
  };
  return Tensor::make_op(x.shape(), std::move(out), {x}, backward, "relu");
}

Tensor maxpool2d(const Tensor& x, int kernel, int stride) {
  check(x.defined() && x.shape().size() == 4, "maxpool2d: input must be 4-D [N,C,H,W]");
  check(kernel >= 1 && stride >= 1, "maxpool2d: kernel and stride must be >= 1");
  const int64_t N = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  check(kernel <= H && kernel <= W,
        "maxpool2d: kernel " + std::to_string(kernel) + " exceeds input " + shape_str(x.shape()));
  const int64_t Ho = (H - kernel) / stride + 1;
  const int64_t Wo = (W - kernel) / stride + 1;

  std::vector<double> out(static_cast<size_t>(N * C * Ho * Wo));
  // first-maximum wins: deterministic tie handling
  auto argmax = std::make_shared<std::vector<int64_t>>(out.size());
  const double* xd = x.data().data();
  for (int64_t n = 0; n < N; ++n) {
    for (int64_t c = 0; c < C; ++c) {
      for (int64_t ho = 0; ho < Ho; ++ho) {
        for (int64_t wo = 0; wo < Wo; ++wo) {
          double best = -std::numeric_limits<double>::infinity();
          int64_t best_idx = -1;
          for (int64_t kh = 0; kh < kernel; ++kh) {
            for (int64_t kw = 0; kw < kernel; ++kw) {
              const int64_t hi = ho * stride + kh;
              const int64_t wi = wo * stride + kw;
              const int64_t xi = ((n * C + c) * H + hi) * W + wi;
              if (xd[xi] > best) {
                best = xd[xi];
                best_idx = xi;
              }
            }
          }
          const size_t oi = static_cast<size_t>(((n * C + c) * Ho + ho) * Wo + wo);
          out[oi] = best;
          (*argmax)[oi] = best_idx;
        }
      }
    }
  }

  if (!x.requires_grad()) return Tensor::make_op({N, C, Ho, Wo}, std::move(out), {}, nullptr, "maxpool2d");
  Tensor xt = x;
  auto backward = [xt, argmax](detail::TensorNode& self) {
    double* gx = detail::grad_ptr(xt);
    if (!gx) return;
    const double* go = self.grad.data();
    for (size_t i = 0; i < self.grad.size(); ++i) gx[(*argmax)[i]] += go[i];
  };
  return Tensor::make_op({N, C, Ho, Wo}, std::move(out), {x}, backward, "maxpool2d");
}

Tensor global_avgpool(const Tensor& x) {
  check(x.defined() && x.shape().size() == 4, "global_avgpool: input must be 4-D [N,C,H,W]");
  const int64_t N = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  const int64_t hw = H * W;
  std::vector<double> out(static_cast<size_t>(N * C));
  const double* xd = x.data().data();
  for (int64_t n = 0; n < N; ++n) {
    for (int64_t c = 0; c < C; ++c) {
      double s = 0.0;
      const size_t base = static_cast<size_t>((n * C + c) * hw);
      for (int64_t i = 0; i < hw; ++i) s += xd[base + i];
      out[static_cast<size_t>(n * C + c)] = s / static_cast<double>(hw);
    }
  }

  if (!x.requires_grad()) return Tensor::make_op({N, C}, std::move(out), {}, nullptr, "global_avgpool");
  Tensor xt = x;
  auto backward = [xt, N, C, hw](detail::TensorNode& self) {
    double* gx = detail::grad_ptr(xt);
    if (!gx) return;
    const double* go = self.grad.data();
    for (int64_t n = 0; n < N; ++n) {
      for (int64_t c = 0; c < C; ++c) {
        const double g = go[n * C + c] / static_cast<double>(hw);
        const size_t base = static_cast<size_t>((n * C + c) * hw);
        for (int64_t i = 0; i < hw; ++i) gx[base + i] += g;
      }
    }
  };
  return Tensor::make_op({N, C}, std::move(out), {x}, backward, "global_avgpool");
}

Tensor dense(const Tensor& x, const Tensor& w, const Tensor& b) {
  check(x.defined() && x.shape().size() == 2, "dense: input must be 2-D [N,in]");
  check(w.defined() && w.shape().size() == 2, "dense: weights must be 2-D [out,in]");
  const int64_t N = x.dim(0), In = x.dim(1), Out = w.dim(0);
  check(w.dim(1) == In, "dense: weight inner dim " + std::to_string(w.dim(1)) +
                            " does not match input features " + std::to_string(In));
  if (b.defined()) check(b.shape() == Shape{Out}, "dense: bias length mismatch");

  std::vector<double> out(static_cast<size_t>(N * Out));
  const double* xd = x.data().data();
  const double* wd = w.data().data();
  const double* bd = b.defined() ? b.data().data() : nullptr;
  for (int64_t n = 0; n < N; ++n) {
    for (int64_t o = 0; o < Out; ++o) {
      double acc = bd ? bd[o] : 0.0;
      for (int64_t i = 0; i < In; ++i) acc += xd[n * In + i] * wd[o * In + i];
      out[static_cast<size_t>(n * Out + o)] = acc;
    }
  }

  const bool rg = x.requires_grad() || w.requires_grad() || (b.defined() && b.requires_grad());
  if (!rg) return Tensor::make_op({N, Out}, std::move(out), {}, nullptr, "dense");
  Tensor xt = x, wt = w, bt = b;
  auto backward = [xt, wt, bt, N, In, Out](detail::TensorNode& self) {
    const double* go = self.grad.data();
    double* gx = detail::grad_ptr(xt);
    double* gw = detail::grad_ptr(wt);
    double* gb = bt.defined() ? detail::grad_ptr(bt) : nullptr;
    const double* xd = xt.data().data();
    const double* wd = wt.data().data();
    for (int64_t n = 0; n < N; ++n) {
      for (int64_t o = 0; o < Out; ++o) {
        const double g = go[n * Out + o];
        if (gb) gb[o] += g;
        for (int64_t i = 0; i < In; ++i) {
          if (gx) gx[n * In + i] += g * wd[o * In + i];
          if (gw) gw[o * In + i] += g * xd[n * In + i];
        }
      }
    }
  };
  std::vector<Tensor> inputs = {x, w};
  if (b.defined()) inputs.push_back(b);
  return Tensor::make_op({N, Out}, std::move(out), std::move(inputs), backward, "dense");
}

Tensor softmax_cross_entropy(const Tensor& logits, const std::vector<int>& labels) {
  check(logits.defined() && logits.shape().size() == 2, "softmax_cross_entropy: logits must be 2-D [N,K]");
  const int64_t N = logits.dim(0), K = logits.dim(1);
  check(N >= 1, "softmax_cross_entropy: zero batch");
  check(static_cast<int64_t>(labels.size()) == N, "softmax_cross_entropy: label count mismatch");
  for (int l : labels) {
    if (l < 0 || l >= K) {
      throw ShapeError("softmax_cross_entropy: label " + std::to_string(l) +
                       " outside [0," + std::to_string(K) + ")");
    }
  }

  const double* zd = logits.data().data();
  auto probs = std::make_shared<std::vector<double>>(static_cast<size_t>(N * K));
  double loss = 0.0;
  for (int64_t n = 0; n < N; ++n) {
    double mx = zd[n * K];
    for (int64_t k = 1; k < K; ++k) mx = std::max(mx, zd[n * K + k]);
    double sum = 0.0;
    for (int64_t k = 0; k < K; ++k) sum += std::exp(zd[n * K + k] - mx);
    const double lse = mx + std::log(sum);
    for (int64_t k = 0; k < K; ++k) (*probs)[n * K + k] = std::exp(zd[n * K + k] - lse);
    loss += lse - zd[n * K + labels[n]];
  }
  loss /= static_cast<double>(N);
  if (!std::isfinite(loss)) throw NumericError("softmax_cross_entropy: non-finite loss");

  if (!logits.requires_grad()) return Tensor::make_op({1}, {loss}, {}, nullptr, "softmax_ce");
  Tensor zt = logits;
  auto labels_copy = std::make_shared<std::vector<int>>(labels);
  auto backward = [zt, probs, labels_copy, N, K](detail::TensorNode& self) {
    double* gz = detail::grad_ptr(zt);
    if (!gz) return;
    const double g = self.grad[0] / static_cast<double>(N);
    for (int64_t n = 0; n < N; ++n) {
      for (int64_t k = 0; k < K; ++k) {
        const double onehot = (k == (*labels_copy)[n]) ? 1.0 : 0.0;
        gz[n * K + k] += g * ((*probs)[n * K + k] - onehot);
      }
    }
  };
  return Tensor::make_op({1}, {loss}, {logits}, backward, "softmax_ce");
}

Tensor add(const Tensor& a, const Tensor& b) {
  check(a.defined() && b.defined(), "add: undefined input");
  check(a.shape() == b.shape(), "add: shape mismatch " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  std::vector<double> out(a.data().size());
  const double* ad = a.data().data();
  const double* bd = b.data().data();
  for (size_t i = 0; i < out.size(); ++i) out[i] = ad[i] + bd[i];

  const bool rg = a.requires_grad() || b.requires_grad();
  if (!rg) return Tensor::make_op(a.shape(), std::move(out), {}, nullptr, "add");
  Tensor at = a, bt = b;
  auto backward = [at, bt](detail::TensorNode& self) {
    double* ga = detail::grad_ptr(at);
    double* gb = detail::grad_ptr(bt);
    const double* go = self.grad.data();
    for (size_t i = 0; i < self.grad.size(); ++i) {
      if (ga) ga[i] += go[i];
      if (gb) gb[i] += go[i];
    }
  };
  return Tensor::make_op(a.shape(), std::move(out), {a, b}, backward, "add");
}

Tensor scale(const Tensor& a, double c) {
  check(a.defined(), "scale: undefined input");
  std::vector<double> out(a.data().size());
  const double* ad = a.data().data();
  for (size_t i = 0; i < out.size(); ++i) out[i] = c * ad[i];

  if (!a.requires_grad()) return Tensor::make_op(a.shape(), std::move(out), {}, nullptr, "scale");
  Tensor at = a;
  auto backward = [at, c](detail::TensorNode& self) {
    double* ga = detail::grad_ptr(at);
    if (!ga) return;
    const double* go = self.grad.data();
    for (size_t i = 0; i < self.grad.size(); ++i) ga[i] += c * go[i];
  };
  return Tensor::make_op(a.shape(), std::move(out), {a}, backward, "scale");
}

Tensor l1_norm(const Tensor& p) {
  check(p.defined(), "l1_norm: undefined input");
  double s = 0.0;
  for (double v : p.data()) s += std::fabs(v);

  if (!p.requires_grad()) return Tensor::make_op({1}, {s}, {}, nullptr, "l1_norm");
  Tensor pt = p;
  auto backward = [pt](detail::TensorNode& self) {
    double* gp = detail::grad_ptr(pt);
    if (!gp) return;
    const double g = self.grad[0];
    const double* pd = pt.data().data();
    for (size_t i = 0; i < pt.data().size(); ++i) gp[i] += g * sign0(pd[i]);
  };
  return Tensor::make_op({1}, {s}, {p}, backward, "l1_norm");
}

Tensor bipolar_norm(const Tensor& p) {
  check(p.defined(), "bipolar_norm: undefined input");
  double s = 0.0;
  for (double v : p.data()) s += std::fabs(v * (1.0 - v));

  if (!p.requires_grad()) return Tensor::make_op({1}, {s}, {}, nullptr, "bipolar_norm");
  Tensor pt = p;
  auto backward = [pt](detail::TensorNode& self) {
    double* gp = detail::grad_ptr(pt);
    if (!gp) return;
    const double g = self.grad[0];
    const double* pd = pt.data().data();
    for (size_t i = 0; i < pt.data().size(); ++i) {
      const double v = pd[i];
      gp[i] += g * (1.0 - 2.0 * v) * sign0(v * (1.0 - v));
    }
  };
  return Tensor::make_op({1}, {s}, {p}, backward, "bipolar_norm");
}

std::vector<int> argmax_rows(const Tensor& logits) {
  check(logits.defined() && logits.shape().size() == 2, "argmax_rows: input must be 2-D");
  const int64_t N = logits.dim(0), K = logits.dim(1);
  const double* zd = logits.data().data();
  std::vector<int> out(static_cast<size_t>(N));
  for (int64_t n = 0; n < N; ++n) {
    int best = 0;
    for (int64_t k = 1; k < K; ++k) {
      if (zd[n * K + k] > zd[n * K + best]) best = static_cast<int>(k);
    }
    out[static_cast<size_t>(n)] = best;
  }
  return out;
}

void sgd_step(const std::string& name, Tensor& param, std::vector<double>& velocity,
              double learning_rate, double momentum) {
  if (learning_rate <= 0.0) throw NumericError("sgd_step: learning rate must be positive");
  if (momentum < 0.0 || momentum >= 1.0) throw NumericError("sgd_step: momentum must be in [0,1)");
  if (!param.has_grad()) return;  // no gradient reached this parameter
  const std::vector<double>& g = param.grad();
  for (double v : g) {
    if (!std::isfinite(v)) {
      throw NumericError("sgd_step: non-finite gradient for parameter '" + name + "'");
    }
  }
  std::vector<double>& d = param.mutable_data();
  if (momentum > 0.0) {
    if (velocity.size() != d.size()) velocity.assign(d.size(), 0.0);
    for (size_t i = 0; i < d.size(); ++i) {
      velocity[i] = momentum * velocity[i] + g[i];
      d[i] -= learning_rate * velocity[i];
    }
  } else {
    for (size_t i = 0; i < d.size(); ++i) d[i] -= learning_rate * g[i];
  }
}

void Sgd::step(const std::string& name, Tensor& param) {
  sgd_step(name, param, velocity_[name], lr_, momentum_);
}

}  // namespace c2s2::ops
