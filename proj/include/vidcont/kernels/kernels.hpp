#pragma once

#include <cstddef>
#include <cstdint>

// Data-parallel inner loops used by the tensor ops and probes. Every kernel
// has a scalar reference implementation and, where profitable, an AVX2 (x86)
// or NEON (aarch64) variant. The variant is chosen once at startup from CPU
// capabilities; VIDCONT_KERNEL=scalar|avx2|neon overrides the choice.
//
// Determinism contract: for a fixed backend, the value written to each output
// element depends only on its own inputs and a fixed accumulation order over
// the reduction dimension. In particular row i of any gemm result is
// bit-identical whether the call covers one row or many (the KV-cache
// equality tests rely on this).
namespace vidcont::kernels {

enum class Backend { scalar, avx2, neon };

Backend active_backend();
const char *backend_name(Backend b);

struct Ops {
    // Row-major throughout. accumulate=false overwrites C, true adds into it.
    // C[M,N] = A[M,K] * B[K,N]
    void (*gemm_nn)(int M, int N, int K, const float *A, int lda, const float *B, int ldb,
                    float *C, int ldc, bool accumulate);
    // C[M,N] = A[M,K] * B[N,K]^T
    void (*gemm_nt)(int M, int N, int K, const float *A, int lda, const float *B, int ldb,
                    float *C, int ldc, bool accumulate);
    // C[M,N] = A[K,M]^T * B[K,N]
    void (*gemm_tn)(int M, int N, int K, const float *A, int lda, const float *B, int ldb,
                    float *C, int ldc, bool accumulate);

    void (*vec_add)(float *y, const float *x, int64_t n);             // y += x
    void (*vec_axpy)(float *y, float a, const float *x, int64_t n);   // y += a*x
    void (*vec_scale)(float *y, float a, int64_t n);                  // y *= a
    void (*vec_mul)(float *y, const float *x, int64_t n);             // y *= x
    float (*vec_sum)(const float *x, int64_t n);
    float (*vec_dot)(const float *a, const float *b, int64_t n);
    float (*vec_max)(const float *x, int64_t n);
    void (*vec_silu)(float *y, const float *x, int64_t n);            // y = x*sigmoid(x)
    // Sum of absolute differences between two u8 blocks (block-matching flow).
    uint64_t (*sad_u8)(const uint8_t *a, const uint8_t *b, int n);
};

// Dispatch table for the active backend.
const Ops &ops();
// Table for one specific backend (scalar always available; others may fall
// back to scalar entries when the CPU or build lacks them).
const Ops &ops_for(Backend b);

// Reference implementations, always available, used as the oracle in
// equivalence tests.
namespace scalar {
void gemm_nn(int M, int N, int K, const float *A, int lda, const float *B, int ldb, float *C,
             int ldc, bool accumulate);
void gemm_nt(int M, int N, int K, const float *A, int lda, const float *B, int ldb, float *C,
             int ldc, bool accumulate);
void gemm_tn(int M, int N, int K, const float *A, int lda, const float *B, int ldb, float *C,
             int ldc, bool accumulate);
void vec_add(float *y, const float *x, int64_t n);
void vec_axpy(float *y, float a, const float *x, int64_t n);
void vec_scale(float *y, float a, int64_t n);
void vec_mul(float *y, const float *x, int64_t n);
float vec_sum(const float *x, int64_t n);
float vec_dot(const float *a, const float *b, int64_t n);
float vec_max(const float *x, int64_t n);
void vec_silu(float *y, const float *x, int64_t n);
uint64_t sad_u8(const uint8_t *a, const uint8_t *b, int n);
}  // namespace scalar

// Convenience wrappers through the active dispatch table.
inline void gemm_nn(int M, int N, int K, const float *A, int lda, const float *B, int ldb,
                    float *C, int ldc, bool accumulate = false) {
    ops().gemm_nn(M, N, K, A, lda, B, ldb, C, ldc, accumulate);
}
inline void gemm_nt(int M, int N, int K, const float *A, int lda, const float *B, int ldb,
                    float *C, int ldc, bool accumulate = false) {
    ops().gemm_nt(M, N, K, A, lda, B, ldb, C, ldc, accumulate);
}
inline void gemm_tn(int M, int N, int K, const float *A, int lda, const float *B, int ldb,
                    float *C, int ldc, bool accumulate = false) {
    ops().gemm_tn(M, N, K, A, lda, B, ldb, C, ldc, accumulate);
}
inline void vec_add(float *y, const float *x, int64_t n) { ops().vec_add(y, x, n); }
inline void vec_axpy(float *y, float a, const float *x, int64_t n) { ops().vec_axpy(y, a, x, n); }
inline void vec_scale(float *y, float a, int64_t n) { ops().vec_scale(y, a, n); }
inline void vec_mul(float *y, const float *x, int64_t n) { ops().vec_mul(y, x, n); }
inline float vec_sum(const float *x, int64_t n) { return ops().vec_sum(x, n); }
inline float vec_dot(const float *a, const float *b, int64_t n) { return ops().vec_dot(a, b, n); }
inline float vec_max(const float *x, int64_t n) { return ops().vec_max(x, n); }
inline void vec_silu(float *y, const float *x, int64_t n) { ops().vec_silu(y, x, n); }
inline uint64_t sad_u8(const uint8_t *a, const uint8_t *b, int n) { return ops().sad_u8(a, b, n); }

}  // namespace vidcont::kernels
