// AVX2+FMA kernel variants. This translation unit is compiled with
// -mavx2 -mfma; nothing here runs unless the dispatcher detected support.

#if defined(__AVX2__) && defined(__FMA__)

#include <immintrin.h>

#include <cstdint>

#include "vidcont/core/threading.hpp"
#include "vidcont/kernels/kernels.hpp"

namespace vidcont::kernels::avx2 {

namespace {

inline float hsum8(__m256 v) {
    const __m128 lo = _mm256_castps256_ps128(v);
    const __m128 hi = _mm256_extractf128_ps(v, 1);
    __m128 s = _mm_add_ps(lo, hi);
    s = _mm_add_ps(s, _mm_movehl_ps(s, s));
    s = _mm_add_ss(s, _mm_shuffle_ps(s, s, 0x55));
    return _mm_cvtss_f32(s);
}

// One row of C over a 16-column register tile, k accumulated sequentially.
inline void nn_row_tile16(const float *a, const float *B, int ldb, int K, float *c, int j,
                          bool accumulate) {
    __m256 c0 = accumulate ? _mm256_loadu_ps(c + j) : _mm256_setzero_ps();
    __m256 c1 = accumulate ? _mm256_loadu_ps(c + j + 8) : _mm256_setzero_ps();
    const float *b = B + j;
    for (int k = 0; k < K; ++k) {
        const __m256 av = _mm256_set1_ps(a[k]);
        c0 = _mm256_fmadd_ps(av, _mm256_loadu_ps(b), c0);
        c1 = _mm256_fmadd_ps(av, _mm256_loadu_ps(b + 8), c1);
        b += ldb;
    }
    _mm256_storeu_ps(c + j, c0);
    _mm256_storeu_ps(c + j + 8, c1);
}

inline void nn_row_tile8(const float *a, const float *B, int ldb, int K, float *c, int j,
                         bool accumulate) {
    __m256 c0 = accumulate ? _mm256_loadu_ps(c + j) : _mm256_setzero_ps();
    const float *b = B + j;
    for (int k = 0; k < K; ++k) {
        c0 = _mm256_fmadd_ps(_mm256_set1_ps(a[k]), _mm256_loadu_ps(b), c0);
        b += ldb;
    }
    _mm256_storeu_ps(c + j, c0);
}

}  // namespace

void gemm_nn(int M, int N, int K, const float *A, int lda, const float *B, int ldb, float *C,
             int ldc, bool accumulate) {
    parallel_for(M, [&](int64_t lo, int64_t hi) {
        for (int64_t i = lo; i < hi; ++i) {
            const float *a = A + i * lda;
            float *c = C + i * ldc;
            int j = 0;
            for (; j + 16 <= N; j += 16) nn_row_tile16(a, B, ldb, K, c, j, accumulate);
            for (; j + 8 <= N; j += 8) nn_row_tile8(a, B, ldb, K, c, j, accumulate);
            for (; j < N; ++j) {
                float acc = accumulate ? c[j] : 0.0f;
                for (int k = 0; k < K; ++k) acc += a[k] * B[static_cast<int64_t>(k) * ldb + j];
                c[j] = acc;
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
                __m256 acc = _mm256_setzero_ps();
                int k = 0;
                for (; k + 8 <= K; k += 8)
                    acc = _mm256_fmadd_ps(_mm256_loadu_ps(a + k), _mm256_loadu_ps(b + k), acc);
                float dot = hsum8(acc);
                for (; k < K; ++k) dot += a[k] * b[k];
                c[j] = accumulate ? c[j] + dot : dot;
            }
        }
    });
}

void gemm_tn(int M, int N, int K, const float *A, int lda, const float *B, int ldb, float *C,
             int ldc, bool accumulate) {
    parallel_for(M, [&](int64_t lo, int64_t hi) {
        for (int64_t i = lo; i < hi; ++i) {
            float *c = C + i * ldc;
            int j = 0;
            for (; j + 16 <= N; j += 16) {
                __m256 c0 = accumulate ? _mm256_loadu_ps(c + j) : _mm256_setzero_ps();
                __m256 c1 = accumulate ? _mm256_loadu_ps(c + j + 8) : _mm256_setzero_ps();
                for (int k = 0; k < K; ++k) {
                    const __m256 av = _mm256_set1_ps(A[static_cast<int64_t>(k) * lda + i]);
                    const float *b = B + static_cast<int64_t>(k) * ldb + j;
                    c0 = _mm256_fmadd_ps(av, _mm256_loadu_ps(b), c0);
                    c1 = _mm256_fmadd_ps(av, _mm256_loadu_ps(b + 8), c1);
                }
                _mm256_storeu_ps(c + j, c0);
                _mm256_storeu_ps(c + j + 8, c1);
            }
            for (; j + 8 <= N; j += 8) {
                __m256 c0 = accumulate ? _mm256_loadu_ps(c + j) : _mm256_setzero_ps();
                for (int k = 0; k < K; ++k) {
                    const __m256 av = _mm256_set1_ps(A[static_cast<int64_t>(k) * lda + i]);
                    c0 = _mm256_fmadd_ps(av, _mm256_loadu_ps(B + static_cast<int64_t>(k) * ldb + j), c0);
                }
                _mm256_storeu_ps(c + j, c0);
            }
            for (; j < N; ++j) {
                float acc = accumulate ? c[j] : 0.0f;
                for (int k = 0; k < K; ++k)
                    acc += A[static_cast<int64_t>(k) * lda + i] * B[static_cast<int64_t>(k) * ldb + j];
                c[j] = acc;
            }
        }
    });
}

void vec_add(float *y, const float *x, int64_t n) {
    int64_t i = 0;
    for (; i + 8 <= n; i += 8)
        _mm256_storeu_ps(y + i, _mm256_add_ps(_mm256_loadu_ps(y + i), _mm256_loadu_ps(x + i)));
    for (; i < n; ++i) y[i] += x[i];
}

void vec_axpy(float *y, float a, const float *x, int64_t n) {
    const __m256 av = _mm256_set1_ps(a);
    int64_t i = 0;
    for (; i + 8 <= n; i += 8)
        _mm256_storeu_ps(y + i, _mm256_fmadd_ps(av, _mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i)));
    for (; i < n; ++i) y[i] += a * x[i];
}

void vec_scale(float *y, float a, int64_t n) {
    const __m256 av = _mm256_set1_ps(a);
    int64_t i = 0;
    for (; i + 8 <= n; i += 8)
        _mm256_storeu_ps(y + i, _mm256_mul_ps(av, _mm256_loadu_ps(y + i)));
    for (; i < n; ++i) y[i] *= a;
}

void vec_mul(float *y, const float *x, int64_t n) {
    int64_t i = 0;
    for (; i + 8 <= n; i += 8)
        _mm256_storeu_ps(y + i, _mm256_mul_ps(_mm256_loadu_ps(y + i), _mm256_loadu_ps(x + i)));
    for (; i < n; ++i) y[i] *= x[i];
}

float vec_sum(const float *x, int64_t n) {
    __m256 acc = _mm256_setzero_ps();
    int64_t i = 0;
    for (; i + 8 <= n; i += 8) acc = _mm256_add_ps(acc, _mm256_loadu_ps(x + i));
    float s = hsum8(acc);
    for (; i < n; ++i) s += x[i];
    return s;
}

float vec_dot(const float *a, const float *b, int64_t n) {
    __m256 acc = _mm256_setzero_ps();
    int64_t i = 0;
    for (; i + 8 <= n; i += 8)
        acc = _mm256_fmadd_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i), acc);
    float s = hsum8(acc);
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

float vec_max(const float *x, int64_t n) {
    if (n < 8) return scalar::vec_max(x, n);
    __m256 m = _mm256_loadu_ps(x);
    int64_t i = 8;
    for (; i + 8 <= n; i += 8) m = _mm256_max_ps(m, _mm256_loadu_ps(x + i));
    const __m128 lo = _mm256_castps256_ps128(m);
    const __m128 hi = _mm256_extractf128_ps(m, 1);
    __m128 s = _mm_max_ps(lo, hi);
    s = _mm_max_ps(s, _mm_movehl_ps(s, s));
    s = _mm_max_ss(s, _mm_shuffle_ps(s, s, 0x55));
    float r = _mm_cvtss_f32(s);
    for (; i < n; ++i)
        if (x[i] > r) r = x[i];
    return r;
}

uint64_t sad_u8(const uint8_t *a, const uint8_t *b, int n) {
    __m256i acc = _mm256_setzero_si256();
    int i = 0;
    for (; i + 32 <= n; i += 32) {
        const __m256i va = _mm256_loadu_si256(reinterpret_cast<const __m256i *>(a + i));
        const __m256i vb = _mm256_loadu_si256(reinterpret_cast<const __m256i *>(b + i));
        acc = _mm256_add_epi64(acc, _mm256_sad_epu8(va, vb));
    }
    alignas(32) uint64_t lanes[4];
    _mm256_store_si256(reinterpret_cast<__m256i *>(lanes), acc);
    uint64_t s = lanes[0] + lanes[1] + lanes[2] + lanes[3];
    for (; i < n; ++i) s += static_cast<uint64_t>(a[i] > b[i] ? a[i] - b[i] : b[i] - a[i]);
    return s;
}

}  // namespace vidcont::kernels::avx2

#endif  // __AVX2__ && __FMA__
