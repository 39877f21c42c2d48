#pragma once

#include <span>

#include "pyrad/autograd.hpp"
#include "pyrad/tensor.hpp"

namespace pyrad {

// Forward operators. Every op computes eagerly and, when `g` is non-null and
// an input is grad-connected, records its backward closure on the tape.
// Pass g == nullptr for pure inference.

// x: N,C,H,W  w: OutC,InC,kH,kW  b: OutC
Tensor conv2d(GradGraph* g, const Tensor& x, const Tensor& w, const Tensor& b, int stride, int padding);

// x: N,InC,H,W  w: InC,OutC,kH,kW  b: OutC; output extent (H-1)*s - 2p + k
Tensor conv_transpose2d(GradGraph* g, const Tensor& x, const Tensor& w, const Tensor& b, int stride, int padding);

// x: N,Fin  w: Fout,Fin  b: Fout; y = x*W^T + b
Tensor linear(GradGraph* g, const Tensor& x, const Tensor& w, const Tensor& b);

// x: N,C,H,W or N,C. Train mode normalizes by batch statistics (per
// channel, batch >= 2) and updates running stats in place with momentum;
// eval mode applies the running stats.
Tensor batch_norm(GradGraph* g, const Tensor& x, const Tensor& gamma, const Tensor& beta,
                  Tensor& running_mean, Tensor& running_var, bool training,
                  float momentum = 0.1f, float eps = 1e-5f);

Tensor relu(GradGraph* g, const Tensor& x);
Tensor tanh(GradGraph* g, const Tensor& x);
// (tanh(x)+1)/2, squashes into [0,1]
Tensor unit_range(GradGraph* g, const Tensor& x);

enum class Activation { relu, tanh, unit_range };
Tensor activation(GradGraph* g, const Tensor& x, Activation kind);

// Mean over evenly partitioned windows; window i spans
// [floor(i*H/out_h), floor((i+1)*H/out_h)).
Tensor adaptive_avg_pool(GradGraph* g, const Tensor& x, int out_h, int out_w);

Tensor add(GradGraph* g, const Tensor& a, const Tensor& b);
Tensor mul_scalar(GradGraph* g, const Tensor& x, float c);
Tensor reshape(GradGraph* g, const Tensor& x, Shape shape);
Tensor concat_channels(GradGraph* g, std::span<const Tensor> parts);

// Four N,C,h,w maps arranged row-major [q0 q1; q2 q3] into N,C,2h,2w.
Tensor tile2x2(GradGraph* g, const Tensor& q0, const Tensor& q1, const Tensor& q2, const Tensor& q3);

// align_corners=false convention; bitwise identity when extents are unchanged.
Tensor resize_bilinear(GradGraph* g, const Tensor& x, int out_h, int out_w);

// scale * sum((a-b)^2) as a scalar tensor; accumulation in f64.
Tensor scaled_sse(GradGraph* g, const Tensor& a, const Tensor& b, double scale);

} // namespace pyrad
