#include "vidcont/nn/ops.hpp"

#include <cassert>
#include <cmath>
#include <cstring>
#include <stdexcept>

#include "vidcont/core/errors.hpp"
#include "vidcont/core/threading.hpp"
#include "vidcont/kernels/kernels.hpp"

namespace vidcont::nn {

namespace {

namespace kn = vidcont::kernels;

bool any_requires(std::initializer_list<const Tensor *> ts) {
    if (!grad_enabled()) return false;
    for (const Tensor *t : ts)
        if (t->defined() && t->requires_grad()) return true;
    return false;
}

void wire(Tensor &out, std::vector<std::shared_ptr<Node>> parents, std::function<void()> fn) {
    out.node()->requires_grad = true;
    out.node()->parents = std::move(parents);
    out.node()->backward_fn = std::move(fn);
}

void check_same_shape(const Tensor &a, const Tensor &b, const char *op) {
    if (a.shape() != b.shape())
        throw DataError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                        shape_str(b.shape()));
}

}  // namespace

// ---------------------------------------------------------------- elementwise

Tensor add(const Tensor &a, const Tensor &b) {
    check_same_shape(a, b, "add");
    Tensor out = Tensor::zeros(a.shape());
    const int64_t n = a.numel();
    std::memcpy(out.data(), a.data(), sizeof(float) * n);
    kn::vec_add(out.data(), b.data(), n);
    if (any_requires({&a, &b})) {
        Node *an = a.node().get(), *bn = b.node().get(), *on = out.node().get();
        wire(out, {a.node(), b.node()}, [an, bn, on, n] {
            if (an->requires_grad) {
                an->ensure_grad();
                kn::vec_add(an->grad.data(), on->grad.data(), n);
            }
            if (bn->requires_grad) {
                bn->ensure_grad();
                kn::vec_add(bn->grad.data(), on->grad.data(), n);
            }
        });
    }
    return out;
}

Tensor sub(const Tensor &a, const Tensor &b) {
    check_same_shape(a, b, "sub");
    Tensor out = Tensor::zeros(a.shape());
    const int64_t n = a.numel();
    for (int64_t i = 0; i < n; ++i) out.data()[i] = a.data()[i] - b.data()[i];
    if (any_requires({&a, &b})) {
        Node *an = a.node().get(), *bn = b.node().get(), *on = out.node().get();
        wire(out, {a.node(), b.node()}, [an, bn, on, n] {
            if (an->requires_grad) {
                an->ensure_grad();
                kn::vec_add(an->grad.data(), on->grad.data(), n);
            }
            if (bn->requires_grad) {
                bn->ensure_grad();
                kn::vec_axpy(bn->grad.data(), -1.0f, on->grad.data(), n);
            }
        });
    }
    return out;
}

Tensor mul(const Tensor &a, const Tensor &b) {
    check_same_shape(a, b, "mul");
    Tensor out = Tensor::zeros(a.shape());
    const int64_t n = a.numel();
    std::memcpy(out.data(), a.data(), sizeof(float) * n);
    kn::vec_mul(out.data(), b.data(), n);
    if (any_requires({&a, &b})) {
        Node *an = a.node().get(), *bn = b.node().get(), *on = out.node().get();
        wire(out, {a.node(), b.node()}, [an, bn, on, n] {
            if (an->requires_grad) {
                an->ensure_grad();
                for (int64_t i = 0; i < n; ++i) an->grad[i] += on->grad[i] * bn->data[i];
            }
            if (bn->requires_grad) {
                bn->ensure_grad();
                for (int64_t i = 0; i < n; ++i) bn->grad[i] += on->grad[i] * an->data[i];
            }
        });
    }
    return out;
}

Tensor scale(const Tensor &a, float s) { return affine(a, s, 0.0f); }

Tensor affine(const Tensor &a, float mul_c, float add_c) {
    Tensor out = Tensor::zeros(a.shape());
    const int64_t n = a.numel();
    for (int64_t i = 0; i < n; ++i) out.data()[i] = mul_c * a.data()[i] + add_c;
    if (any_requires({&a})) {
        Node *an = a.node().get(), *on = out.node().get();
        wire(out, {a.node()}, [an, on, n, mul_c] {
            an->ensure_grad();
            kn::vec_axpy(an->grad.data(), mul_c, on->grad.data(), n);
        });
    }
    return out;
}

Tensor silu(const Tensor &x) {
    Tensor out = Tensor::zeros(x.shape());
    const int64_t n = x.numel();
    kn::vec_silu(out.data(), x.data(), n);
    if (any_requires({&x})) {
        Node *xn = x.node().get(), *on = out.node().get();
        wire(out, {x.node()}, [xn, on, n] {
            xn->ensure_grad();
            for (int64_t i = 0; i < n; ++i) {
                const float v = xn->data[i];
                const float s = 1.0f / (1.0f + std::exp(-v));
                xn->grad[i] += on->grad[i] * (s * (1.0f + v * (1.0f - s)));
            }
        });
    }
    return out;
}

Tensor sigmoid(const Tensor &x) {
    Tensor out = Tensor::zeros(x.shape());
    const int64_t n = x.numel();
    for (int64_t i = 0; i < n; ++i) out.data()[i] = 1.0f / (1.0f + std::exp(-x.data()[i]));
    if (any_requires({&x})) {
        Node *xn = x.node().get(), *on = out.node().get();
        wire(out, {x.node()}, [xn, on, n] {
            xn->ensure_grad();
            for (int64_t i = 0; i < n; ++i) {
                const float s = on->data[i];
                xn->grad[i] += on->grad[i] * s * (1.0f - s);
            }
        });
    }
    return out;
}

Tensor tanh_act(const Tensor &x) {
    Tensor out = Tensor::zeros(x.shape());
    const int64_t n = x.numel();
    for (int64_t i = 0; i < n; ++i) out.data()[i] = std::tanh(x.data()[i]);
    if (any_requires({&x})) {
        Node *xn = x.node().get(), *on = out.node().get();
        wire(out, {x.node()}, [xn, on, n] {
            xn->ensure_grad();
            for (int64_t i = 0; i < n; ++i) {
                const float t = on->data[i];
                xn->grad[i] += on->grad[i] * (1.0f - t * t);
            }
        });
    }
    return out;
}

Tensor xlogx(const Tensor &x, float eps) {
    Tensor out = Tensor::zeros(x.shape());
    const int64_t n = x.numel();
    for (int64_t i = 0; i < n; ++i) {
        const float v = x.data()[i] < eps ? eps : x.data()[i];
        out.data()[i] = v * std::log(v);
    }
    if (any_requires({&x})) {
        Node *xn = x.node().get(), *on = out.node().get();
        wire(out, {x.node()}, [xn, on, n, eps] {
            xn->ensure_grad();
            for (int64_t i = 0; i < n; ++i) {
                const float v = xn->data[i] < eps ? eps : xn->data[i];
                xn->grad[i] += on->grad[i] * (std::log(v) + 1.0f);
            }
        });
    }
    return out;
}

// ---------------------------------------------------------------- reductions

Tensor sum_all(const Tensor &x) {
    Tensor out = Tensor::zeros({1});
    const int64_t n = x.numel();
    out.data()[0] = kn::vec_sum(x.data(), n);
    if (any_requires({&x})) {
        Node *xn = x.node().get(), *on = out.node().get();
        wire(out, {x.node()}, [xn, on, n] {
            xn->ensure_grad();
            const float g = on->grad[0];
            for (int64_t i = 0; i < n; ++i) xn->grad[i] += g;
        });
    }
    return out;
}

Tensor mean_all(const Tensor &x) {
    const int64_t n = x.numel();
    Tensor out = Tensor::zeros({1});
    out.data()[0] = kn::vec_sum(x.data(), n) / static_cast<float>(n);
    if (any_requires({&x})) {
        Node *xn = x.node().get(), *on = out.node().get();
        wire(out, {x.node()}, [xn, on, n] {
            xn->ensure_grad();
            const float g = on->grad[0] / static_cast<float>(n);
            for (int64_t i = 0; i < n; ++i) xn->grad[i] += g;
        });
    }
    return out;
}

Tensor mean_rows(const Tensor &x) {
    if (x.ndim() != 2) throw DataError("mean_rows expects a 2-D tensor");
    const int R = x.dim(0), C = x.dim(1);
    Tensor out = Tensor::zeros({C});
    for (int r = 0; r < R; ++r) kn::vec_add(out.data(), x.data() + static_cast<int64_t>(r) * C, C);
    kn::vec_scale(out.data(), 1.0f / static_cast<float>(R), C);
    if (any_requires({&x})) {
        Node *xn = x.node().get(), *on = out.node().get();
        wire(out, {x.node()}, [xn, on, R, C] {
            xn->ensure_grad();
            const float inv = 1.0f / static_cast<float>(R);
            for (int r = 0; r < R; ++r)
                kn::vec_axpy(xn->grad.data() + static_cast<int64_t>(r) * C, inv, on->grad.data(), C);
        });
    }
    return out;
}

Tensor reshape(const Tensor &x, const Shape &s) {
    if (shape_numel(s) != x.numel())
        throw DataError("reshape: element count mismatch " + shape_str(x.shape()) + " -> " +
                        shape_str(s));
    Tensor out = Tensor::from_data(s, x.vec());
    if (any_requires({&x})) {
        Node *xn = x.node().get(), *on = out.node().get();
        const int64_t n = x.numel();
        wire(out, {x.node()}, [xn, on, n] {
            xn->ensure_grad();
            kn::vec_add(xn->grad.data(), on->grad.data(), n);
        });
    }
    return out;
}

Tensor nchw_to_cells(const Tensor &x) {
    if (x.ndim() != 4) throw DataError("nchw_to_cells expects a 4-D tensor");
    const int N = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
    const int64_t hw = static_cast<int64_t>(H) * W;
    Tensor out = Tensor::zeros({static_cast<int>(N * hw), C});
    const float *src = x.data();
    float *dst = out.data();
    for (int n = 0; n < N; ++n)
        for (int c = 0; c < C; ++c) {
            const float *s = src + ((static_cast<int64_t>(n) * C + c) * hw);
            float *d = dst + static_cast<int64_t>(n) * hw * C + c;
            for (int64_t p = 0; p < hw; ++p) d[p * C] = s[p];
        }
    if (any_requires({&x})) {
        Node *xn = x.node().get(), *on = out.node().get();
        wire(out, {x.node()}, [xn, on, N, C, hw] {
            xn->ensure_grad();
            for (int n = 0; n < N; ++n)
                for (int c = 0; c < C; ++c) {
                    float *s = xn->grad.data() + ((static_cast<int64_t>(n) * C + c) * hw);
                    const float *d = on->grad.data() + static_cast<int64_t>(n) * hw * C + c;
                    for (int64_t p = 0; p < hw; ++p) s[p] += d[p * C];
                }
        });
    }
    return out;
}

Tensor cells_to_nchw(const Tensor &x, int N, int H, int W) {
    if (x.ndim() != 2) throw DataError("cells_to_nchw expects a 2-D tensor");
    const int C = x.dim(1);
    const int64_t hw = static_cast<int64_t>(H) * W;
    if (static_cast<int64_t>(x.dim(0)) != N * hw)
        throw DataError("cells_to_nchw: row count does not match N*H*W");
    Tensor out = Tensor::zeros({N, C, H, W});
    const float *src = x.data();
    float *dst = out.data();
    for (int n = 0; n < N; ++n)
        for (int c = 0; c < C; ++c) {
            float *d = dst + ((static_cast<int64_t>(n) * C + c) * hw);
            const float *s = src + static_cast<int64_t>(n) * hw * C + c;
            for (int64_t p = 0; p < hw; ++p) d[p] = s[p * C];
        }
    if (any_requires({&x})) {
        Node *xn = x.node().get(), *on = out.node().get();
        wire(out, {x.node()}, [xn, on, N, C, hw] {
            xn->ensure_grad();
            for (int n = 0; n < N; ++n)
                for (int c = 0; c < C; ++c) {
                    const float *d = on->grad.data() + ((static_cast<int64_t>(n) * C + c) * hw);
                    float *s = xn->grad.data() + static_cast<int64_t>(n) * hw * C + c;
                    for (int64_t p = 0; p < hw; ++p) s[p * C] += d[p];
                }
        });
    }
    return out;
}

Tensor concat_channels(const Tensor &a, const Tensor &b) {
    if (a.ndim() != 4 || b.ndim() != 4) throw DataError("concat_channels expects 4-D tensors");
    if (a.dim(0) != b.dim(0) || a.dim(2) != b.dim(2) || a.dim(3) != b.dim(3))
        throw DataError("concat_channels: spatial/batch dims differ");
    const int N = a.dim(0), Ca = a.dim(1), Cb = b.dim(1), H = a.dim(2), W = a.dim(3);
    const int64_t hw = static_cast<int64_t>(H) * W;
    Tensor out = Tensor::zeros({N, Ca + Cb, H, W});
    for (int n = 0; n < N; ++n) {
        std::memcpy(out.data() + static_cast<int64_t>(n) * (Ca + Cb) * hw,
                    a.data() + static_cast<int64_t>(n) * Ca * hw, sizeof(float) * Ca * hw);
        std::memcpy(out.data() + (static_cast<int64_t>(n) * (Ca + Cb) + Ca) * hw,
                    b.data() + static_cast<int64_t>(n) * Cb * hw, sizeof(float) * Cb * hw);
    }
    if (any_requires({&a, &b})) {
        Node *an = a.node().get(), *bn = b.node().get(), *on = out.node().get();
        wire(out, {a.node(), b.node()}, [an, bn, on, N, Ca, Cb, hw] {
            for (int n = 0; n < N; ++n) {
                if (an->requires_grad) {
                    an->ensure_grad();
                    kn::vec_add(an->grad.data() + static_cast<int64_t>(n) * Ca * hw,
                                on->grad.data() + static_cast<int64_t>(n) * (Ca + Cb) * hw, Ca * hw);
                }
                if (bn->requires_grad) {
                    bn->ensure_grad();
                    kn::vec_add(bn->grad.data() + static_cast<int64_t>(n) * Cb * hw,
                                on->grad.data() + (static_cast<int64_t>(n) * (Ca + Cb) + Ca) * hw,
                                Cb * hw);
                }
            }
        });
    }
    return out;
}

// ------------------------------------------------------------- linear algebra

Tensor matmul(const Tensor &a, const Tensor &b) {
    if (a.ndim() != 2 || b.ndim() != 2 || a.dim(1) != b.dim(0))
        throw DataError("matmul: incompatible shapes " + shape_str(a.shape()) + " x " +
                        shape_str(b.shape()));
    const int M = a.dim(0), K = a.dim(1), N = b.dim(1);
    Tensor out = Tensor::zeros({M, N});
    kn::gemm_nn(M, N, K, a.data(), K, b.data(), N, out.data(), N, false);
    if (any_requires({&a, &b})) {
        Node *an = a.node().get(), *bn = b.node().get(), *on = out.node().get();
        wire(out, {a.node(), b.node()}, [an, bn, on, M, N, K] {
            if (an->requires_grad) {
                an->ensure_grad();
                kn::gemm_nt(M, K, N, on->grad.data(), N, bn->data.data(), N, an->grad.data(), K, true);
            }
            if (bn->requires_grad) {
                bn->ensure_grad();
                kn::gemm_tn(K, N, M, an->data.data(), K, on->grad.data(), N, bn->grad.data(), N, true);
            }
        });
    }
    return out;
}

Tensor linear(const Tensor &x, const Tensor &w) {
    if (x.ndim() != 2 || w.ndim() != 2 || x.dim(1) != w.dim(1))
        throw DataError("linear: incompatible shapes " + shape_str(x.shape()) + " x " +
                        shape_str(w.shape()) + "^T");
    const int M = x.dim(0), K = x.dim(1), N = w.dim(0);
    Tensor out = Tensor::zeros({M, N});
    kn::gemm_nt(M, N, K, x.data(), K, w.data(), K, out.data(), N, false);
    if (any_requires({&x, &w})) {
        Node *xn = x.node().get(), *wn = w.node().get(), *on = out.node().get();
        wire(out, {x.node(), w.node()}, [xn, wn, on, M, N, K] {
            if (xn->requires_grad) {
                xn->ensure_grad();
                kn::gemm_nn(M, K, N, on->grad.data(), N, wn->data.data(), K, xn->grad.data(), K, true);
            }
            if (wn->requires_grad) {
                wn->ensure_grad();
                kn::gemm_tn(N, K, M, on->grad.data(), N, xn->data.data(), K, wn->grad.data(), K, true);
            }
        });
    }
    return out;
}

Tensor add_rowvec(const Tensor &x, const Tensor &b) {
    if (x.ndim() != 2 || b.ndim() != 1 || x.dim(1) != b.dim(0))
        throw DataError("add_rowvec: incompatible shapes");
    const int R = x.dim(0), C = x.dim(1);
    Tensor out = Tensor::zeros({R, C});
    for (int r = 0; r < R; ++r) {
        float *o = out.data() + static_cast<int64_t>(r) * C;
        std::memcpy(o, x.data() + static_cast<int64_t>(r) * C, sizeof(float) * C);
        kn::vec_add(o, b.data(), C);
    }
    if (any_requires({&x, &b})) {
        Node *xn = x.node().get(), *bn = b.node().get(), *on = out.node().get();
        wire(out, {x.node(), b.node()}, [xn, bn, on, R, C] {
            if (xn->requires_grad) {
                xn->ensure_grad();
                kn::vec_add(xn->grad.data(), on->grad.data(), static_cast<int64_t>(R) * C);
            }
            if (bn->requires_grad) {
                bn->ensure_grad();
                for (int r = 0; r < R; ++r)
                    kn::vec_add(bn->grad.data(), on->grad.data() + static_cast<int64_t>(r) * C, C);
            }
        });
    }
    return out;
}

Tensor linear_bias(const Tensor &x, const Tensor &w, const Tensor &b) {
    return add_rowvec(linear(x, w), b);
}

// ----------------------------------------------------------------------- conv

namespace {

void im2col(const float *img, int C, int H, int W, int kh, int kw, int stride, int pad, int Ho,
            int Wo, float *cols) {
    // cols is [C*kh*kw, Ho*Wo]
    const int64_t plane = static_cast<int64_t>(Ho) * Wo;
    for (int c = 0; c < C; ++c)
        for (int ki = 0; ki < kh; ++ki)
            for (int kj = 0; kj < kw; ++kj) {
                float *row = cols + ((static_cast<int64_t>(c) * kh + ki) * kw + kj) * plane;
                for (int y = 0; y < Ho; ++y) {
                    const int sy = y * stride + ki - pad;
                    if (sy < 0 || sy >= H) {
                        std::memset(row + static_cast<int64_t>(y) * Wo, 0, sizeof(float) * Wo);
                        continue;
                    }
                    const float *src = img + (static_cast<int64_t>(c) * H + sy) * W;
                    float *dst = row + static_cast<int64_t>(y) * Wo;
                    for (int x = 0; x < Wo; ++x) {
                        const int sx = x * stride + kj - pad;
                        dst[x] = (sx >= 0 && sx < W) ? src[sx] : 0.0f;
                    }
                }
            }
}

void col2im_add(const float *cols, int C, int H, int W, int kh, int kw, int stride, int pad, int Ho,
                int Wo, float *img_grad) {
    const int64_t plane = static_cast<int64_t>(Ho) * Wo;
    for (int c = 0; c < C; ++c)
        for (int ki = 0; ki < kh; ++ki)
            for (int kj = 0; kj < kw; ++kj) {
                const float *row = cols + ((static_cast<int64_t>(c) * kh + ki) * kw + kj) * plane;
                for (int y = 0; y < Ho; ++y) {
                    const int sy = y * stride + ki - pad;
                    if (sy < 0 || sy >= H) continue;
                    float *dst = img_grad + (static_cast<int64_t>(c) * H + sy) * W;
                    const float *src = row + static_cast<int64_t>(y) * Wo;
                    for (int x = 0; x < Wo; ++x) {
                        const int sx = x * stride + kj - pad;
                        if (sx >= 0 && sx < W) dst[sx] += src[x];
                    }
                }
            }
}

}  // namespace

Tensor conv2d(const Tensor &x, const Tensor &w, const Tensor &b, int stride, int pad) {
    if (x.ndim() != 4 || w.ndim() != 4) throw DataError("conv2d expects 4-D input and weight");
    const int N = x.dim(0), Ci = x.dim(1), H = x.dim(2), W = x.dim(3);
    const int Co = w.dim(0), kh = w.dim(2), kw = w.dim(3);
    if (w.dim(1) != Ci) throw DataError("conv2d: channel mismatch");
    const int Ho = (H + 2 * pad - kh) / stride + 1;
    const int Wo = (W + 2 * pad - kw) / stride + 1;
    if (Ho <= 0 || Wo <= 0) throw DataError("conv2d: kernel larger than padded input");
    const int Kdim = Ci * kh * kw;
    const int64_t plane = static_cast<int64_t>(Ho) * Wo;

    Tensor out = Tensor::zeros({N, Co, Ho, Wo});
    std::vector<float> cols(static_cast<size_t>(Kdim) * plane);
    for (int n = 0; n < N; ++n) {
        im2col(x.data() + static_cast<int64_t>(n) * Ci * H * W, Ci, H, W, kh, kw, stride, pad, Ho,
               Wo, cols.data());
        float *o = out.data() + static_cast<int64_t>(n) * Co * plane;
        kn::gemm_nn(Co, static_cast<int>(plane), Kdim, w.data(), Kdim, cols.data(),
                    static_cast<int>(plane), o, static_cast<int>(plane), false);
        if (b.defined())
            for (int c = 0; c < Co; ++c) {
                const float bias = b.data()[c];
                float *oc = o + static_cast<int64_t>(c) * plane;
                for (int64_t p = 0; p < plane; ++p) oc[p] += bias;
            }
    }

    const bool has_bias = b.defined();
    if (any_requires({&x, &w, &b})) {
        Node *xn = x.node().get(), *wn = w.node().get(), *on = out.node().get();
        Node *bn = has_bias ? b.node().get() : nullptr;
        std::vector<std::shared_ptr<Node>> parents = {x.node(), w.node()};
        if (has_bias) parents.push_back(b.node());
        wire(out, std::move(parents), [xn, wn, bn, on, N, Ci, H, W, Co, kh, kw, stride, pad, Ho, Wo,
                                       Kdim, plane] {
            std::vector<float> cols2(static_cast<size_t>(Kdim) * plane);
            std::vector<float> dcols(static_cast<size_t>(Kdim) * plane);
            for (int n = 0; n < N; ++n) {
                const float *dy = on->grad.data() + static_cast<int64_t>(n) * Co * plane;
                if (wn->requires_grad)
                    im2col(xn->data.data() + static_cast<int64_t>(n) * Ci * H * W, Ci, H, W, kh, kw,
                           stride, pad, Ho, Wo, cols2.data());
                if (wn->requires_grad) {
                    wn->ensure_grad();
                    kn::gemm_nt(Co, Kdim, static_cast<int>(plane), dy, static_cast<int>(plane),
                                cols2.data(), static_cast<int>(plane), wn->grad.data(), Kdim, true);
                }
                if (xn->requires_grad) {
                    xn->ensure_grad();
                    kn::gemm_tn(Kdim, static_cast<int>(plane), Co, wn->data.data(), Kdim, dy,
                                static_cast<int>(plane), dcols.data(), static_cast<int>(plane),
                                false);
                    col2im_add(dcols.data(), Ci, H, W, kh, kw, stride, pad, Ho, Wo,
                               xn->grad.data() + static_cast<int64_t>(n) * Ci * H * W);
                }
                if (bn && bn->requires_grad) {
                    bn->ensure_grad();
                    for (int c = 0; c < Co; ++c)
                        bn->grad[c] += kn::vec_sum(dy + static_cast<int64_t>(c) * plane, plane);
                }
            }
        });
    }
    return out;
}

Tensor upsample_nearest2(const Tensor &x) {
    if (x.ndim() != 4) throw DataError("upsample_nearest2 expects a 4-D tensor");
    const int N = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
    Tensor out = Tensor::zeros({N, C, 2 * H, 2 * W});
    for (int nc = 0; nc < N * C; ++nc) {
        const float *src = x.data() + static_cast<int64_t>(nc) * H * W;
        float *dst = out.data() + static_cast<int64_t>(nc) * 4 * H * W;
        for (int y = 0; y < H; ++y)
            for (int x2 = 0; x2 < W; ++x2) {
                const float v = src[y * W + x2];
                float *d = dst + (2 * y) * (2 * W) + 2 * x2;
                d[0] = v;
                d[1] = v;
                d[2 * W] = v;
                d[2 * W + 1] = v;
            }
    }
    if (any_requires({&x})) {
        Node *xn = x.node().get(), *on = out.node().get();
        wire(out, {x.node()}, [xn, on, N, C, H, W] {
            xn->ensure_grad();
            for (int nc = 0; nc < N * C; ++nc) {
                float *sg = xn->grad.data() + static_cast<int64_t>(nc) * H * W;
                const float *dg = on->grad.data() + static_cast<int64_t>(nc) * 4 * H * W;
                for (int y = 0; y < H; ++y)
                    for (int x2 = 0; x2 < W; ++x2) {
                        const float *d = dg + (2 * y) * (2 * W) + 2 * x2;
                        sg[y * W + x2] += d[0] + d[1] + d[2 * W] + d[2 * W + 1];
                    }
            }
        });
    }
    return out;
}

Tensor group_norm(const Tensor &x, const Tensor &gamma, const Tensor &beta, int groups, float eps) {
    if (x.ndim() != 4) throw DataError("group_norm expects a 4-D tensor");
    const int N = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
    if (C % groups != 0) throw DataError("group_norm: C not divisible by groups");
    const int cg = C / groups;
    const int64_t gsz = static_cast<int64_t>(cg) * H * W;
    const int64_t hw = static_cast<int64_t>(H) * W;

    Tensor out = Tensor::zeros(x.shape());
    std::vector<float> means(static_cast<size_t>(N) * groups), invstd(static_cast<size_t>(N) * groups);
    for (int n = 0; n < N; ++n)
        for (int g = 0; g < groups; ++g) {
            const float *src = x.data() + (static_cast<int64_t>(n) * C + g * cg) * hw;
            const float mean = kn::vec_sum(src, gsz) / static_cast<float>(gsz);
            float var = 0.0f;
            for (int64_t i = 0; i < gsz; ++i) {
                const float d = src[i] - mean;
                var += d * d;
            }
            var /= static_cast<float>(gsz);
            const float inv = 1.0f / std::sqrt(var + eps);
            means[static_cast<size_t>(n) * groups + g] = mean;
            invstd[static_cast<size_t>(n) * groups + g] = inv;
            float *dst = out.data() + (static_cast<int64_t>(n) * C + g * cg) * hw;
            for (int c = 0; c < cg; ++c) {
                const float ga = gamma.data()[g * cg + c];
                const float be = beta.data()[g * cg + c];
                const float *s = src + static_cast<int64_t>(c) * hw;
                float *d = dst + static_cast<int64_t>(c) * hw;
                for (int64_t i = 0; i < hw; ++i) d[i] = ga * (s[i] - mean) * inv + be;
            }
        }

    if (any_requires({&x, &gamma, &beta})) {
        Node *xn = x.node().get(), *gn = gamma.node().get(), *bn = beta.node().get(),
             *on = out.node().get();
        wire(out, {x.node(), gamma.node(), beta.node()},
             [xn, gn, bn, on, N, C, H, W, groups, cg, gsz, hw, means, invstd] {
                 for (int n = 0; n < N; ++n)
                     for (int g = 0; g < groups; ++g) {
                         const float mean = means[static_cast<size_t>(n) * groups + g];
                         const float inv = invstd[static_cast<size_t>(n) * groups + g];
                         const float *src = xn->data.data() + (static_cast<int64_t>(n) * C + g * cg) * hw;
                         const float *dy = on->grad.data() + (static_cast<int64_t>(n) * C + g * cg) * hw;
                         // accumulate the two reduction terms over the group
                         float sum_dxhat = 0.0f, sum_dxhat_xhat = 0.0f;
                         for (int c = 0; c < cg; ++c) {
                             const float ga = gn->data[g * cg + c];
                             for (int64_t i = 0; i < hw; ++i) {
                                 const float xhat = (src[c * hw + i] - mean) * inv;
                                 const float dxh = dy[c * hw + i] * ga;
                                 sum_dxhat += dxh;
                                 sum_dxhat_xhat += dxh * xhat;
                             }
                         }
                         if (gn->requires_grad || bn->requires_grad) {
                             gn->ensure_grad();
                             bn->ensure_grad();
                             for (int c = 0; c < cg; ++c) {
                                 float dga = 0.0f, dbe = 0.0f;
                                 for (int64_t i = 0; i < hw; ++i) {
                                     const float xhat = (src[c * hw + i] - mean) * inv;
                                     dga += dy[c * hw + i] * xhat;
                                     dbe += dy[c * hw + i];
                                 }
                                 gn->grad[g * cg + c] += dga;
                                 bn->grad[g * cg + c] += dbe;
                             }
                         }
                         if (xn->requires_grad) {
                             xn->ensure_grad();
                             float *dx = xn->grad.data() + (static_cast<int64_t>(n) * C + g * cg) * hw;
                             const float inv_gsz = 1.0f / static_cast<float>(gsz);
                             for (int c = 0; c < cg; ++c) {
                                 const float ga = gn->data[g * cg + c];
                                 for (int64_t i = 0; i < hw; ++i) {
                                     const float xhat = (src[c * hw + i] - mean) * inv;
                                     const float dxh = dy[c * hw + i] * ga;
                                     dx[c * hw + i] += inv *
                                         (dxh - inv_gsz * (sum_dxhat + xhat * sum_dxhat_xhat));
                                 }
                             }
                         }
                     }
             });
    }
    return out;
}

// ----------------------------------------------------------------- transformer

Tensor rms_norm(const Tensor &x, const Tensor &gamma, float eps) {
    if (x.ndim() != 2) throw DataError("rms_norm expects a 2-D tensor");
    const int T = x.dim(0), D = x.dim(1);
    if (gamma.dim(0) != D) throw DataError("rms_norm: gamma size mismatch");
    Tensor out = Tensor::zeros(x.shape());
    std::vector<float> invr(static_cast<size_t>(T));
    for (int t = 0; t < T; ++t) {
        const float *row = x.data() + static_cast<int64_t>(t) * D;
        const float ms = kn::vec_dot(row, row, D) / static_cast<float>(D);
        const float inv = 1.0f / std::sqrt(ms + eps);
        invr[static_cast<size_t>(t)] = inv;
        float *o = out.data() + static_cast<int64_t>(t) * D;
        for (int d = 0; d < D; ++d) o[d] = row[d] * inv * gamma.data()[d];
    }
    if (any_requires({&x, &gamma})) {
        Node *xn = x.node().get(), *gn = gamma.node().get(), *on = out.node().get();
        wire(out, {x.node(), gamma.node()}, [xn, gn, on, T, D, invr] {
            for (int t = 0; t < T; ++t) {
                const float *row = xn->data.data() + static_cast<int64_t>(t) * D;
                const float *dy = on->grad.data() + static_cast<int64_t>(t) * D;
                const float inv = invr[static_cast<size_t>(t)];
                if (gn->requires_grad) {
                    gn->ensure_grad();
                    for (int d = 0; d < D; ++d) gn->grad[d] += dy[d] * row[d] * inv;
                }
                if (xn->requires_grad) {
                    xn->ensure_grad();
                    float dot = 0.0f;
                    for (int d = 0; d < D; ++d) dot += dy[d] * gn->data[d] * row[d];
                    const float coef = dot * inv * inv * inv / static_cast<float>(D);
                    float *dx = xn->grad.data() + static_cast<int64_t>(t) * D;
                    for (int d = 0; d < D; ++d) dx[d] += dy[d] * gn->data[d] * inv - coef * row[d];
                }
            }
        });
    }
    return out;
}

Tensor embedding(const Tensor &table, const std::vector<int> &ids) {
    const int V = table.dim(0), D = table.dim(1);
    const int T = static_cast<int>(ids.size());
    for (int id : ids)
        if (id < 0 || id >= V) throw DataError("embedding: id out of range");
    Tensor out = Tensor::zeros({T, D});
    for (int t = 0; t < T; ++t)
        std::memcpy(out.data() + static_cast<int64_t>(t) * D,
                    table.data() + static_cast<int64_t>(ids[static_cast<size_t>(t)]) * D,
                    sizeof(float) * D);
    if (any_requires({&table})) {
        Node *tn = table.node().get(), *on = out.node().get();
        wire(out, {table.node()}, [tn, on, ids, T, D] {
            tn->ensure_grad();
            for (int t = 0; t < T; ++t)
                kn::vec_add(tn->grad.data() + static_cast<int64_t>(ids[static_cast<size_t>(t)]) * D,
                            on->grad.data() + static_cast<int64_t>(t) * D, D);
        });
    }
    return out;
}

namespace {

void rope_tables(int T, int dh, int pos_offset, float base, std::vector<float> &cosv,
                 std::vector<float> &sinv) {
    const int pairs = dh / 2;
    cosv.resize(static_cast<size_t>(T) * pairs);
    sinv.resize(static_cast<size_t>(T) * pairs);
    for (int t = 0; t < T; ++t)
        for (int p = 0; p < pairs; ++p) {
            const double freq = std::pow(static_cast<double>(base),
                                         -2.0 * static_cast<double>(p) / static_cast<double>(dh));
            const double ang = static_cast<double>(t + pos_offset) * freq;
            cosv[static_cast<size_t>(t) * pairs + p] = static_cast<float>(std::cos(ang));
            sinv[static_cast<size_t>(t) * pairs + p] = static_cast<float>(std::sin(ang));
        }
}

}  // namespace

Tensor rope(const Tensor &x, int n_heads, int pos_offset, float base) {
    if (x.ndim() != 2) throw DataError("rope expects a 2-D tensor");
    const int T = x.dim(0), D = x.dim(1);
    if (D % n_heads != 0) throw DataError("rope: D not divisible by heads");
    const int dh = D / n_heads;
    if (dh % 2 != 0) throw DataError("rope: head dim must be even");
    const int pairs = dh / 2;
    std::vector<float> cosv, sinv;
    rope_tables(T, dh, pos_offset, base, cosv, sinv);

    Tensor out = Tensor::zeros(x.shape());
    for (int t = 0; t < T; ++t) {
        const float *src = x.data() + static_cast<int64_t>(t) * D;
        float *dst = out.data() + static_cast<int64_t>(t) * D;
        for (int h = 0; h < n_heads; ++h)
            for (int p = 0; p < pairs; ++p) {
                const float c = cosv[static_cast<size_t>(t) * pairs + p];
                const float s = sinv[static_cast<size_t>(t) * pairs + p];
                const float a = src[h * dh + 2 * p];
                const float b2 = src[h * dh + 2 * p + 1];
                dst[h * dh + 2 * p] = a * c - b2 * s;
                dst[h * dh + 2 * p + 1] = a * s + b2 * c;
            }
    }
    if (any_requires({&x})) {
        Node *xn = x.node().get(), *on = out.node().get();
        wire(out, {x.node()}, [xn, on, T, D, n_heads, dh, pairs, cosv, sinv] {
            xn->ensure_grad();
            for (int t = 0; t < T; ++t) {
                const float *dy = on->grad.data() + static_cast<int64_t>(t) * D;
                float *dx = xn->grad.data() + static_cast<int64_t>(t) * D;
                for (int h = 0; h < n_heads; ++h)
                    for (int p = 0; p < pairs; ++p) {
                        const float c = cosv[static_cast<size_t>(t) * pairs + p];
                        const float s = sinv[static_cast<size_t>(t) * pairs + p];
                        const float da = dy[h * dh + 2 * p];
                        const float db = dy[h * dh + 2 * p + 1];
                        dx[h * dh + 2 * p] += da * c + db * s;
                        dx[h * dh + 2 * p + 1] += -da * s + db * c;
                    }
            }
        });
    }
    return out;
}

namespace {

// Causal softmax over the first (i+1) entries of each row; the rest are set
// to exact zero so downstream accumulations are bit-stable with incremental
// decoding.
void causal_softmax_rows(float *scores, int T) {
    parallel_for(T, [&](int64_t lo, int64_t hi) {
        for (int64_t i = lo; i < hi; ++i) {
            float *row = scores + i * T;
            const int n = static_cast<int>(i) + 1;
            const float m = kn::vec_max(row, n);
            for (int j = 0; j < n; ++j) row[j] = std::exp(row[j] - m);
            const float s = kn::vec_sum(row, n);
            const float inv = 1.0f / s;
            for (int j = 0; j < n; ++j) row[j] *= inv;
            for (int j = n; j < T; ++j) row[j] = 0.0f;
        }
    });
}

void head_gather(const float *x, int T, int D, int h, int dh, float *dst) {
    for (int t = 0; t < T; ++t)
        std::memcpy(dst + static_cast<int64_t>(t) * dh, x + static_cast<int64_t>(t) * D + h * dh,
                    sizeof(float) * dh);
}

void head_scatter_add(float *x, int T, int D, int h, int dh, const float *src) {
    for (int t = 0; t < T; ++t)
        kn::vec_add(x + static_cast<int64_t>(t) * D + h * dh, src + static_cast<int64_t>(t) * dh, dh);
}

}  // namespace

Tensor attention_causal(const Tensor &q, const Tensor &k, const Tensor &v, int n_heads) {
    check_same_shape(q, k, "attention");
    check_same_shape(q, v, "attention");
    const int T = q.dim(0), D = q.dim(1);
    if (D % n_heads != 0) throw DataError("attention: D not divisible by heads");
    const int dh = D / n_heads;
    const float sc = 1.0f / std::sqrt(static_cast<float>(dh));

    Tensor out = Tensor::zeros({T, D});
    {
        std::vector<float> qh(static_cast<size_t>(T) * dh), kh(static_cast<size_t>(T) * dh),
            vh(static_cast<size_t>(T) * dh), oh(static_cast<size_t>(T) * dh);
        std::vector<float> scores(static_cast<size_t>(T) * T);
        for (int h = 0; h < n_heads; ++h) {
            head_gather(q.data(), T, D, h, dh, qh.data());
            head_gather(k.data(), T, D, h, dh, kh.data());
            head_gather(v.data(), T, D, h, dh, vh.data());
            kn::gemm_nt(T, T, dh, qh.data(), dh, kh.data(), dh, scores.data(), T, false);
            kn::vec_scale(scores.data(), sc, static_cast<int64_t>(T) * T);
            causal_softmax_rows(scores.data(), T);
            kn::gemm_nn(T, dh, T, scores.data(), T, vh.data(), dh, oh.data(), dh, false);
            head_scatter_add(out.data(), T, D, h, dh, oh.data());
        }
    }

    if (any_requires({&q, &k, &v})) {
        Node *qn = q.node().get(), *kn_ = k.node().get(), *vn = v.node().get(),
             *on = out.node().get();
        wire(out, {q.node(), k.node(), v.node()}, [qn, kn_, vn, on, T, D, n_heads, dh, sc] {
            qn->ensure_grad();
            kn_->ensure_grad();
            vn->ensure_grad();
            std::vector<float> qh(static_cast<size_t>(T) * dh), kh(static_cast<size_t>(T) * dh),
                vh(static_cast<size_t>(T) * dh), dh_buf(static_cast<size_t>(T) * dh);
            std::vector<float> probs(static_cast<size_t>(T) * T), dP(static_cast<size_t>(T) * T);
            for (int h = 0; h < n_heads; ++h) {
                head_gather(qn->data.data(), T, D, h, dh, qh.data());
                head_gather(kn_->data.data(), T, D, h, dh, kh.data());
                head_gather(vn->data.data(), T, D, h, dh, vh.data());
                // recompute probabilities (saves T*T per layer otherwise)
                kn::gemm_nt(T, T, dh, qh.data(), dh, kh.data(), dh, probs.data(), T, false);
                kn::vec_scale(probs.data(), sc, static_cast<int64_t>(T) * T);
                causal_softmax_rows(probs.data(), T);

                std::vector<float> doh(static_cast<size_t>(T) * dh);
                head_gather(on->grad.data(), T, D, h, dh, doh.data());

                // dV = P^T dO
                kn::gemm_tn(T, dh, T, probs.data(), T, doh.data(), dh, dh_buf.data(), dh, false);
                head_scatter_add(vn->grad.data(), T, D, h, dh, dh_buf.data());

                // dP = dO V^T, then softmax backward into dS (stored in dP)
                kn::gemm_nt(T, T, dh, doh.data(), dh, vh.data(), dh, dP.data(), T, false);
                parallel_for(T, [&](int64_t lo, int64_t hi) {
                    for (int64_t i = lo; i < hi; ++i) {
                        float *dp = dP.data() + i * T;
                        const float *p = probs.data() + i * T;
                        const int n = static_cast<int>(i) + 1;
                        float dot = 0.0f;
                        for (int j = 0; j < n; ++j) dot += dp[j] * p[j];
                        for (int j = 0; j < n; ++j) dp[j] = p[j] * (dp[j] - dot) * sc;
                        for (int j = n; j < T; ++j) dp[j] = 0.0f;
                    }
                });

                // dQ = dS K ; dK = dS^T Q
                kn::gemm_nn(T, dh, T, dP.data(), T, kh.data(), dh, dh_buf.data(), dh, false);
                head_scatter_add(qn->grad.data(), T, D, h, dh, dh_buf.data());
                kn::gemm_tn(T, dh, T, dP.data(), T, qh.data(), dh, dh_buf.data(), dh, false);
                head_scatter_add(kn_->grad.data(), T, D, h, dh, dh_buf.data());
            }
        });
    }
    return out;
}

// --------------------------------------------------------------------- losses

Tensor cross_entropy(const Tensor &logits, const std::vector<int> &targets,
                     const std::vector<uint8_t> &mask) {
    if (logits.ndim() != 2) throw DataError("cross_entropy expects 2-D logits");
    const int T = logits.dim(0), V = logits.dim(1);
    if (static_cast<int>(targets.size()) != T || static_cast<int>(mask.size()) != T)
        throw DataError("cross_entropy: target/mask length mismatch");
    int count = 0;
    for (int t = 0; t < T; ++t)
        if (mask[static_cast<size_t>(t)]) ++count;
    if (count == 0) throw DataError("cross_entropy: empty mask");

    std::vector<float> probs(static_cast<size_t>(T) * V);
    double loss = 0.0;
    for (int t = 0; t < T; ++t) {
        const float *row = logits.data() + static_cast<int64_t>(t) * V;
        float *p = probs.data() + static_cast<int64_t>(t) * V;
        const float m = kn::vec_max(row, V);
        float s = 0.0f;
        for (int j = 0; j < V; ++j) {
            p[j] = std::exp(row[j] - m);
            s += p[j];
        }
        const float inv = 1.0f / s;
        for (int j = 0; j < V; ++j) p[j] *= inv;
        if (mask[static_cast<size_t>(t)]) {
            const int tgt = targets[static_cast<size_t>(t)];
            if (tgt < 0 || tgt >= V) throw DataError("cross_entropy: target out of range");
            loss -= std::log(std::max(p[tgt], 1e-20f));
        }
    }
    Tensor out = Tensor::zeros({1});
    out.data()[0] = static_cast<float>(loss / count);

    if (any_requires({&logits})) {
        Node *ln = logits.node().get(), *on = out.node().get();
        wire(out, {logits.node()}, [ln, on, probs = std::move(probs), targets, mask, T, V, count] {
            ln->ensure_grad();
            const float g = on->grad[0] / static_cast<float>(count);
            for (int t = 0; t < T; ++t) {
                if (!mask[static_cast<size_t>(t)]) continue;
                const float *p = probs.data() + static_cast<int64_t>(t) * V;
                float *dl = ln->grad.data() + static_cast<int64_t>(t) * V;
                const int tgt = targets[static_cast<size_t>(t)];
                for (int j = 0; j < V; ++j) dl[j] += g * p[j];
                dl[tgt] -= g;
            }
        });
    }
    return out;
}

Tensor mse_loss(const Tensor &a, const Tensor &b) {
    check_same_shape(a, b, "mse_loss");
    const int64_t n = a.numel();
    double acc = 0.0;
    for (int64_t i = 0; i < n; ++i) {
        const double d = static_cast<double>(a.data()[i]) - b.data()[i];
        acc += d * d;
    }
    Tensor out = Tensor::zeros({1});
    out.data()[0] = static_cast<float>(acc / static_cast<double>(n));
    if (any_requires({&a, &b})) {
        Node *an = a.node().get(), *bn = b.node().get(), *on = out.node().get();
        wire(out, {a.node(), b.node()}, [an, bn, on, n] {
            const float g = 2.0f * on->grad[0] / static_cast<float>(n);
            if (an->requires_grad) {
                an->ensure_grad();
                for (int64_t i = 0; i < n; ++i) an->grad[i] += g * (an->data[i] - bn->data[i]);
            }
            if (bn->requires_grad) {
                bn->ensure_grad();
                for (int64_t i = 0; i < n; ++i) bn->grad[i] -= g * (an->data[i] - bn->data[i]);
            }
        });
    }
    return out;
}

Tensor l1_loss(const Tensor &a, const Tensor &b) {
    check_same_shape(a, b, "l1_loss");
    const int64_t n = a.numel();
    double acc = 0.0;
    for (int64_t i = 0; i < n; ++i) acc += std::fabs(static_cast<double>(a.data()[i]) - b.data()[i]);
    Tensor out = Tensor::zeros({1});
    out.data()[0] = static_cast<float>(acc / static_cast<double>(n));
    if (any_requires({&a, &b})) {
        Node *an = a.node().get(), *bn = b.node().get(), *on = out.node().get();
        wire(out, {a.node(), b.node()}, [an, bn, on, n] {
            const float g = on->grad[0] / static_cast<float>(n);
            for (int64_t i = 0; i < n; ++i) {
                const float d = an->data[i] - bn->data[i];
                const float s = d > 0.0f ? 1.0f : (d < 0.0f ? -1.0f : 0.0f);
                if (an->requires_grad) {
                    an->ensure_grad();
                    an->grad[i] += g * s;
                }
                if (bn->requires_grad) {
                    bn->ensure_grad();
                    bn->grad[i] -= g * s;
                }
            }
        });
    }
    return out;
}

// ------------------------------------------------------- quantization / warp

Tensor ste_sign(const Tensor &z) {
    Tensor out = Tensor::zeros(z.shape());
    const int64_t n = z.numel();
    for (int64_t i = 0; i < n; ++i) out.data()[i] = z.data()[i] > 0.0f ? 1.0f : -1.0f;
    if (any_requires({&z})) {
        Node *zn = z.node().get(), *on = out.node().get();
        wire(out, {z.node()}, [zn, on, n] {
            zn->ensure_grad();
            kn::vec_add(zn->grad.data(), on->grad.data(), n);
        });
    }
    return out;
}

Tensor bilinear_warp(const Tensor &feat, const Tensor &flow) {
    if (feat.ndim() != 3 || flow.ndim() != 3 || flow.dim(0) != 2)
        throw DataError("bilinear_warp expects feat [C,H,W] and flow [2,H,W]");
    const int C = feat.dim(0), H = feat.dim(1), W = feat.dim(2);
    if (flow.dim(1) != H || flow.dim(2) != W) throw DataError("bilinear_warp: shape mismatch");
    const int64_t hw = static_cast<int64_t>(H) * W;

    Tensor out = Tensor::zeros(feat.shape());
    const float *fx = flow.data();
    const float *fy = flow.data() + hw;
    for (int i = 0; i < H; ++i)
        for (int j = 0; j < W; ++j) {
            const int64_t p = static_cast<int64_t>(i) * W + j;
            float x = static_cast<float>(j) + fx[p];
            float y = static_cast<float>(i) + fy[p];
            x = std::min(std::max(x, 0.0f), static_cast<float>(W - 1));
            y = std::min(std::max(y, 0.0f), static_cast<float>(H - 1));
            const int x0 = static_cast<int>(std::floor(x));
            const int y0 = static_cast<int>(std::floor(y));
            const int x1 = std::min(x0 + 1, W - 1);
            const int y1 = std::min(y0 + 1, H - 1);
            const float wx = x - static_cast<float>(x0);
            const float wy = y - static_cast<float>(y0);
            for (int c = 0; c < C; ++c) {
                const float *f = feat.data() + static_cast<int64_t>(c) * hw;
                const float v0 = f[y0 * W + x0] * (1.0f - wx) + f[y0 * W + x1] * wx;
                const float v1 = f[y1 * W + x0] * (1.0f - wx) + f[y1 * W + x1] * wx;
                out.data()[static_cast<int64_t>(c) * hw + p] = v0 * (1.0f - wy) + v1 * wy;
            }
        }

    if (any_requires({&feat, &flow})) {
        Node *fn = feat.node().get(), *fl = flow.node().get(), *on = out.node().get();
        wire(out, {feat.node(), flow.node()}, [fn, fl, on, C, H, W, hw] {
            const float *fx2 = fl->data.data();
            const float *fy2 = fl->data.data() + hw;
            for (int i = 0; i < H; ++i)
                for (int j = 0; j < W; ++j) {
                    const int64_t p = static_cast<int64_t>(i) * W + j;
                    const float rx = static_cast<float>(j) + fx2[p];
                    const float ry = static_cast<float>(i) + fy2[p];
                    const bool cx = rx <= 0.0f || rx >= static_cast<float>(W - 1);
                    const bool cy = ry <= 0.0f || ry >= static_cast<float>(H - 1);
                    const float x = std::min(std::max(rx, 0.0f), static_cast<float>(W - 1));
                    const float y = std::min(std::max(ry, 0.0f), static_cast<float>(H - 1));
                    const int x0 = static_cast<int>(std::floor(x));
                    const int y0 = static_cast<int>(std::floor(y));
                    const int x1 = std::min(x0 + 1, W - 1);
                    const int y1 = std::min(y0 + 1, H - 1);
                    const float wx = x - static_cast<float>(x0);
                    const float wy = y - static_cast<float>(y0);
                    float dvdx = 0.0f, dvdy = 0.0f;
                    for (int c = 0; c < C; ++c) {
                        const float *f = fn->data.data() + static_cast<int64_t>(c) * hw;
                        const float g = on->grad[static_cast<int64_t>(c) * hw + p];
                        if (fn->requires_grad) {
                            fn->ensure_grad();
                            float *df = fn->grad.data() + static_cast<int64_t>(c) * hw;
                            df[y0 * W + x0] += g * (1.0f - wx) * (1.0f - wy);
                            df[y0 * W + x1] += g * wx * (1.0f - wy);
                            df[y1 * W + x0] += g * (1.0f - wx) * wy;
                            df[y1 * W + x1] += g * wx * wy;
                        }
                        const float f00 = f[y0 * W + x0], f01 = f[y0 * W + x1];
                        const float f10 = f[y1 * W + x0], f11 = f[y1 * W + x1];
                        dvdx += g * ((1.0f - wy) * (f01 - f00) + wy * (f11 - f10));
                        dvdy += g * ((1.0f - wx) * (f10 - f00) + wx * (f11 - f01));
                    }
                    if (fl->requires_grad) {
                        fl->ensure_grad();
                        if (!cx) fl->grad[p] += dvdx;
                        if (!cy) fl->grad[hw + p] += dvdy;
                    }
                }
        });
    }
    return out;
}

}  // namespace vidcont::nn
