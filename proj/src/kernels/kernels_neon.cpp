// NEON variants for the vector kernels. The gemm entries stay on the scalar
// reference on aarch64; -O3 autovectorizes those loops acceptably there.

#if defined(__ARM_NEON) || defined(__ARM_NEON__)

#include <arm_neon.h>

#include <cstdint>

#include "vidcont/kernels/kernels.hpp"

namespace vidcont::kernels::neon {

void vec_add(float *y, const float *x, int64_t n) {
    int64_t i = 0;
    for (; i + 4 <= n; i += 4) vst1q_f32(y + i, vaddq_f32(vld1q_f32(y + i), vld1q_f32(x + i)));
    for (; i < n; ++i) y[i] += x[i];
}

void vec_axpy(float *y, float a, const float *x, int64_t n) {
    const float32x4_t av = vdupq_n_f32(a);
    int64_t i = 0;
    for (; i + 4 <= n; i += 4)
        vst1q_f32(y + i, vmlaq_f32(vld1q_f32(y + i), av, vld1q_f32(x + i)));
    for (; i < n; ++i) y[i] += a * x[i];
}

void vec_scale(float *y, float a, int64_t n) {
    const float32x4_t av = vdupq_n_f32(a);
    int64_t i = 0;
    for (; i + 4 <= n; i += 4) vst1q_f32(y + i, vmulq_f32(av, vld1q_f32(y + i)));
    for (; i < n; ++i) y[i] *= a;
}

void vec_mul(float *y, const float *x, int64_t n) {
    int64_t i = 0;
    for (; i + 4 <= n; i += 4) vst1q_f32(y + i, vmulq_f32(vld1q_f32(y + i), vld1q_f32(x + i)));
    for (; i < n; ++i) y[i] *= x[i];
}

float vec_sum(const float *x, int64_t n) {
    float32x4_t acc = vdupq_n_f32(0.0f);
    int64_t i = 0;
    for (; i + 4 <= n; i += 4) acc = vaddq_f32(acc, vld1q_f32(x + i));
    float s = vgetq_lane_f32(acc, 0) + vgetq_lane_f32(acc, 1) + vgetq_lane_f32(acc, 2) +
              vgetq_lane_f32(acc, 3);
    for (; i < n; ++i) s += x[i];
    return s;
}

float vec_dot(const float *a, const float *b, int64_t n) {
    float32x4_t acc = vdupq_n_f32(0.0f);
    int64_t i = 0;
    for (; i + 4 <= n; i += 4) acc = vmlaq_f32(acc, vld1q_f32(a + i), vld1q_f32(b + i));
    float s = vgetq_lane_f32(acc, 0) + vgetq_lane_f32(acc, 1) + vgetq_lane_f32(acc, 2) +
              vgetq_lane_f32(acc, 3);
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

float vec_max(const float *x, int64_t n) {
    if (n < 4) return scalar::vec_max(x, n);
    float32x4_t m = vld1q_f32(x);
    int64_t i = 4;
    for (; i + 4 <= n; i += 4) m = vmaxq_f32(m, vld1q_f32(x + i));
    float r = vgetq_lane_f32(m, 0);
    r = vgetq_lane_f32(m, 1) > r ? vgetq_lane_f32(m, 1) : r;
    r = vgetq_lane_f32(m, 2) > r ? vgetq_lane_f32(m, 2) : r;
    r = vgetq_lane_f32(m, 3) > r ? vgetq_lane_f32(m, 3) : r;
    for (; i < n; ++i)
        if (x[i] > r) r = x[i];
    return r;
}

uint64_t sad_u8(const uint8_t *a, const uint8_t *b, int n) {
    uint64x2_t acc = vdupq_n_u64(0);
    int i = 0;
    for (; i + 16 <= n; i += 16) {
        const uint8x16_t d = vabdq_u8(vld1q_u8(a + i), vld1q_u8(b + i));
        acc = vaddq_u64(acc, vpaddlq_u32(vpaddlq_u16(vpaddlq_u8(d))));
    }
    uint64_t s = vgetq_lane_u64(acc, 0) + vgetq_lane_u64(acc, 1);
    for (; i < n; ++i) s += static_cast<uint64_t>(a[i] > b[i] ? a[i] - b[i] : b[i] - a[i]);
    return s;
}

}  // namespace vidcont::kernels::neon

#endif  // __ARM_NEON
