#pragma once

#include <cstdint>
#include <vector>

#include "vidcont/nn/tensor.hpp"

// Differentiable op library. Forward paths run on the kernels layer; each op
// wires an explicit backward closure. Conventions:
//   - images/features are NCHW, row-major
//   - sequence activations are [T, D]
//   - weights of linear layers are [out, in] (y = x W^T)
namespace vidcont::nn {

// ---- elementwise ----
Tensor add(const Tensor &a, const Tensor &b);
Tensor sub(const Tensor &a, const Tensor &b);
Tensor mul(const Tensor &a, const Tensor &b);
Tensor scale(const Tensor &a, float s);
Tensor affine(const Tensor &a, float mul_c, float add_c);  // mul_c*x + add_c
Tensor silu(const Tensor &x);
Tensor sigmoid(const Tensor &x);
Tensor tanh_act(const Tensor &x);
// x*ln(x) with the argument clamped to [eps, inf); entropy building block.
Tensor xlogx(const Tensor &x, float eps = 1e-7f);

// ---- reductions / shape ----
Tensor sum_all(const Tensor &x);
Tensor mean_all(const Tensor &x);
Tensor mean_rows(const Tensor &x);  // [R,C] -> [C]
Tensor reshape(const Tensor &x, const Shape &s);
// [N,C,H,W] -> [N*H*W, C] (cell-major), and back.
Tensor nchw_to_cells(const Tensor &x);
Tensor cells_to_nchw(const Tensor &x, int N, int H, int W);
Tensor concat_channels(const Tensor &a, const Tensor &b);  // NCHW along C

// ---- linear algebra ----
Tensor matmul(const Tensor &a, const Tensor &b);            // [M,K]x[K,N]
Tensor linear(const Tensor &x, const Tensor &w);            // [M,K]x[N,K]^T
Tensor linear_bias(const Tensor &x, const Tensor &w, const Tensor &b);
Tensor add_rowvec(const Tensor &x, const Tensor &b);        // [R,C] + [C]

// ---- convolution stack ----
Tensor conv2d(const Tensor &x, const Tensor &w, const Tensor &b, int stride, int pad);
Tensor upsample_nearest2(const Tensor &x);
Tensor group_norm(const Tensor &x, const Tensor &gamma, const Tensor &beta, int groups,
                  float eps = 1e-5f);

// ---- transformer ----
Tensor rms_norm(const Tensor &x, const Tensor &gamma, float eps = 1e-5f);
Tensor embedding(const Tensor &table, const std::vector<int> &ids);
// Interleaved-pair rotary embedding applied per head; pos_offset shifts all
// positions (used by incremental decoding paths).
Tensor rope(const Tensor &x, int n_heads, int pos_offset = 0, float base = 10000.0f);
Tensor attention_causal(const Tensor &q, const Tensor &k, const Tensor &v, int n_heads);

// ---- losses ----
// Mean next-token cross entropy in nats over positions with mask!=0.
Tensor cross_entropy(const Tensor &logits, const std::vector<int> &targets,
                     const std::vector<uint8_t> &mask);
Tensor mse_loss(const Tensor &a, const Tensor &b);
Tensor l1_loss(const Tensor &a, const Tensor &b);

// ---- quantization / warping ----
// Forward: +1 where z > 0, else -1. Backward: identity (straight-through).
Tensor ste_sign(const Tensor &z);
// feat [C,H,W], flow [2,H,W] (channel 0 = x/col displacement, 1 = y/row).
// out(p) = bilinear sample of feat at p + flow(p), border-clamped.
Tensor bilinear_warp(const Tensor &feat, const Tensor &flow);

}  // namespace vidcont::nn
