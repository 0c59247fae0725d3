#pragma once

#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pronsim/tensor.hpp"

namespace pronsim {

// out = W * x + b.  W is [n x m], x is [m], b is [n].
Tensor affine(const Tensor& x, const Parameter& w, const Parameter& b);

// Accumulates into w.grad and b.grad, returns dL/dx.
Tensor affine_backward(const Tensor& x, Parameter& w, Parameter& b,
                       const Tensor& d_out);

enum class Activation { Sigmoid, Tanh, Relu };

Tensor activation(Activation kind, const Tensor& x);

// d_out is dL/dy; x and y are the forward input/output.  Returns dL/dx.
// relu uses subgradient 0 at the kink.
Tensor activation_backward(Activation kind, const Tensor& x, const Tensor& y,
                           const Tensor& d_out);

struct SoftmaxNll {
  double loss;
  Tensor probs;
};

// Stabilized softmax + negative log likelihood over >= 2 classes.
SoftmaxNll softmax_nll(const Tensor& logits, std::size_t true_class);

// dL/dlogits = probs - onehot(true_class), scaled by d_loss.
Tensor softmax_nll_backward(const SoftmaxNll& fwd, std::size_t true_class,
                            double d_loss = 1.0);

// f = 1 - d_cos(u, v) = (1 + u.v / (|u||v|)) / 2, in [0, 1].
// Throws on a zero-norm input.
double cosine_similarity01(const Tensor& u, const Tensor& v);

// Adds d_f * df/du into du and d_f * df/dv into dv.
void cosine_similarity01_backward(const Tensor& u, const Tensor& v, double d_f,
                                  Tensor& du, Tensor& dv);

struct GradCheckEntry {
  std::string param;
  double max_rel_err = 0.0;
  std::size_t coords_checked = 0;
  bool pass = true;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  bool all_pass() const {
    for (const auto& e : entries)
      if (!e.pass) return false;
    return true;
  }
};

// Central-difference check of analytic gradients.
//
// fn(true) must zero nothing itself: grad_check zeroes all grads, calls
// fn(true) once to populate them, then perturbs parameter values and calls
// fn(false) for the finite differences.  For tensors larger than
// coords_per_tensor a random coordinate sample is checked (at least 64).
GradCheckReport grad_check(const std::function<double(bool with_grad)>& fn,
                           std::span<Parameter* const> params, double h,
                           double tol, std::size_t coords_per_tensor, Rng& rng);

}  // namespace pronsim
