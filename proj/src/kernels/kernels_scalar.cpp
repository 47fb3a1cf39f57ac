#include <cmath>
#include <cstdlib>

#include "vidcont/core/threading.hpp"
#include "vidcont/kernels/kernels.hpp"

namespace vidcont::kernels::scalar {

// Reference gemm kernels. Plain loops, one sequential accumulation per output
// element; the SIMD variants follow the same per-element k-order.

void gemm_nn(int M, int N, int K, const float *A, int lda, const float *B, int ldb, float *C,
             int ldc, bool accumulate) {
    parallel_for(M, [&](int64_t lo, int64_t hi) {
        for (int64_t i = lo; i < hi; ++i) {
            float *c = C + i * ldc;
            if (!accumulate) {
                for (int j = 0; j < N; ++j) c[j] = 0.0f;
            }
            const float *a = A + i * lda;
            for (int k = 0; k < K; ++k) {
                const float av = a[k];
                const float *b = B + static_cast<int64_t>(k) * ldb;
                for (int j = 0; j < N; ++j) c[j] += av * b[j];
            }
        }
    });
}

void gemm_nt(int M, int N, int K, const float *A, int lda, const float *B, int ldb, float *C,
             int ldc, bool accumulate) {
    parallel_for(M, [&](int64_t lo, int64_t hi) {
        for (int64_t i = lo; i < hi; ++i) {
            const float *a = A + i * lda;
            float *c = C + i * ldc;
            for (int j = 0; j < N; ++j) {
                const float *b = B + static_cast<int64_t>(j) * ldb;
                float acc = 0.0f;
                for (int k = 0; k < K; ++k) acc += a[k] * b[k];
                c[j] = accumulate ? c[j] + acc : acc;
            }
        }
    });
}

void gemm_tn(int M, int N, int K, const float *A, int lda, const float *B, int ldb, float *C,
             int ldc, bool accumulate) {
    parallel_for(M, [&](int64_t lo, int64_t hi) {
        for (int64_t i = lo; i < hi; ++i) {
            float *c = C + i * ldc;
            if (!accumulate) {
                for (int j = 0; j < N; ++j) c[j] = 0.0f;
            }
            for (int k = 0; k < K; ++k) {
                const float av = A[static_cast<int64_t>(k) * lda + i];
                const float *b = B + static_cast<int64_t>(k) * ldb;
                for (int j = 0; j < N; ++j) c[j] += av * b[j];
            }
        }
    });
}

void vec_add(float *y, const float *x, int64_t n) {
    for (int64_t i = 0; i < n; ++i) y[i] += x[i];
}

void vec_axpy(float *y, float a, const float *x, int64_t n) {
    for (int64_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void vec_scale(float *y, float a, int64_t n) {
    for (int64_t i = 0; i < n; ++i) y[i] *= a;
}

void vec_mul(float *y, const float *x, int64_t n) {
    for (int64_t i = 0; i < n; ++i) y[i] *= x[i];
}

float vec_sum(const float *x, int64_t n) {
    // Pairwise-ish: accumulate in 8 lanes then reduce, matching the SIMD
    // variants' order so results stay close.
    float lanes[8] = {0, 0, 0, 0, 0, 0, 0, 0};
    int64_t i = 0;
    for (; i + 8 <= n; i += 8)
        for (int l = 0; l < 8; ++l) lanes[l] += x[i + l];
    float tail = 0.0f;
    for (; i < n; ++i) tail += x[i];
    const float s0 = (lanes[0] + lanes[4]) + (lanes[1] + lanes[5]);
    const float s1 = (lanes[2] + lanes[6]) + (lanes[3] + lanes[7]);
    return (s0 + s1) + tail;
}

float vec_dot(const float *a, const float *b, int64_t n) {
    float lanes[8] = {0, 0, 0, 0, 0, 0, 0, 0};
    int64_t i = 0;
    for (; i + 8 <= n; i += 8)
        for (int l = 0; l < 8; ++l) lanes[l] += a[i + l] * b[i + l];
    float tail = 0.0f;
    for (; i < n; ++i) tail += a[i] * b[i];
    const float s0 = (lanes[0] + lanes[4]) + (lanes[1] + lanes[5]);
    const float s1 = (lanes[2] + lanes[6]) + (lanes[3] + lanes[7]);
    return (s0 + s1) + tail;
}

float vec_max(const float *x, int64_t n) {
    float m = x[0];
    for (int64_t i = 1; i < n; ++i)
        if (x[i] > m) m = x[i];
    return m;
}

void vec_silu(float *y, const float *x, int64_t n) {
    for (int64_t i = 0; i < n; ++i) {
        const float v = x[i];
        y[i] = v / (1.0f + std::exp(-v));
    }
}

uint64_t sad_u8(const uint8_t *a, const uint8_t *b, int n) {
    uint64_t s = 0;
    for (int i = 0; i < n; ++i) s += static_cast<uint64_t>(a[i] > b[i] ? a[i] - b[i] : b[i] - a[i]);
    return s;
}

}  // namespace vidcont::kernels::scalar
