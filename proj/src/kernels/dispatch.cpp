#include <cstdlib>
#include <cstring>

#include "vidcont/kernels/kernels.hpp"

namespace vidcont::kernels {

// Declarations for the variant TUs; they only exist when the target arch
// provides the instruction set.
namespace avx2 {
void gemm_nn(int, int, int, const float *, int, const float *, int, float *, int, bool);
void gemm_nt(int, int, int, const float *, int, const float *, int, float *, int, bool);
void gemm_tn(int, int, int, const float *, int, const float *, int, float *, int, bool);
void vec_add(float *, const float *, int64_t);
void vec_axpy(float *, float, const float *, int64_t);
void vec_scale(float *, float, int64_t);
void vec_mul(float *, const float *, int64_t);
float vec_sum(const float *, int64_t);
float vec_dot(const float *, const float *, int64_t);
float vec_max(const float *, int64_t);
uint64_t sad_u8(const uint8_t *, const uint8_t *, int);
}  // namespace avx2

namespace neon {
void vec_add(float *, const float *, int64_t);
void vec_axpy(float *, float, const float *, int64_t);
void vec_scale(float *, float, int64_t);
void vec_mul(float *, const float *, int64_t);
float vec_sum(const float *, int64_t);
float vec_dot(const float *, const float *, int64_t);
float vec_max(const float *, int64_t);
uint64_t sad_u8(const uint8_t *, const uint8_t *, int);
}  // namespace neon

namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

bool cpu_has_neon() {
#if defined(__ARM_NEON) || defined(__ARM_NEON__)
    return true;
#else
    return false;
#endif
}

bool variant_compiled(Backend b) {
    switch (b) {
        case Backend::scalar: return true;
        case Backend::avx2:
#if defined(__x86_64__) || defined(__i386__)
            return true;  // kernels_avx2.cpp is compiled with -mavx2 -mfma on x86
#else
            return false;
#endif
        case Backend::neon:
#if defined(__ARM_NEON) || defined(__ARM_NEON__)
            return true;
#else
            return false;
#endif
    }
    return false;
}

Ops make_scalar_table() {
    Ops t{};
    t.gemm_nn = scalar::gemm_nn;
    t.gemm_nt = scalar::gemm_nt;
    t.gemm_tn = scalar::gemm_tn;
    t.vec_add = scalar::vec_add;
    t.vec_axpy = scalar::vec_axpy;
    t.vec_scale = scalar::vec_scale;
    t.vec_mul = scalar::vec_mul;
    t.vec_sum = scalar::vec_sum;
    t.vec_dot = scalar::vec_dot;
    t.vec_max = scalar::vec_max;
    t.vec_silu = scalar::vec_silu;
    t.sad_u8 = scalar::sad_u8;
    return t;
}

Ops make_table(Backend b) {
    Ops t = make_scalar_table();
#if defined(__x86_64__) || defined(__i386__)
    if (b == Backend::avx2) {
        t.gemm_nn = avx2::gemm_nn;
        t.gemm_nt = avx2::gemm_nt;
        t.gemm_tn = avx2::gemm_tn;
        t.vec_add = avx2::vec_add;
        t.vec_axpy = avx2::vec_axpy;
        t.vec_scale = avx2::vec_scale;
        t.vec_mul = avx2::vec_mul;
        t.vec_sum = avx2::vec_sum;
        t.vec_dot = avx2::vec_dot;
        t.vec_max = avx2::vec_max;
        t.sad_u8 = avx2::sad_u8;
        // vec_silu stays scalar: expf dominates and vectorizing it buys little.
    }
#endif
#if defined(__ARM_NEON) || defined(__ARM_NEON__)
    if (b == Backend::neon) {
        t.vec_add = neon::vec_add;
        t.vec_axpy = neon::vec_axpy;
        t.vec_scale = neon::vec_scale;
        t.vec_mul = neon::vec_mul;
        t.vec_sum = neon::vec_sum;
        t.vec_dot = neon::vec_dot;
        t.vec_max = neon::vec_max;
        t.sad_u8 = neon::sad_u8;
    }
#endif
    (void)b;
    return t;
}

Backend detect_backend() {
    if (const char *env = std::getenv("VIDCONT_KERNEL")) {
        if (std::strcmp(env, "scalar") == 0) return Backend::scalar;
        if (std::strcmp(env, "avx2") == 0 && cpu_has_avx2() && variant_compiled(Backend::avx2))
            return Backend::avx2;
        if (std::strcmp(env, "neon") == 0 && cpu_has_neon() && variant_compiled(Backend::neon))
            return Backend::neon;
        return Backend::scalar;
    }
    if (cpu_has_avx2() && variant_compiled(Backend::avx2)) return Backend::avx2;
    if (cpu_has_neon() && variant_compiled(Backend::neon)) return Backend::neon;
    return Backend::scalar;
}

}  // namespace

Backend active_backend() {
    static const Backend b = detect_backend();
    return b;
}

const char *backend_name(Backend b) {
    switch (b) {
        case Backend::scalar: return "scalar";
        case Backend::avx2: return "avx2";
        case Backend::neon: return "neon";
    }
    return "?";
}

const Ops &ops_for(Backend b) {
    static const Ops scalar_table = make_table(Backend::scalar);
    static const Ops avx2_table = make_table(Backend::avx2);
    static const Ops neon_table = make_table(Backend::neon);
    switch (b) {
        case Backend::avx2: return avx2_table;
        case Backend::neon: return neon_table;
        default: return scalar_table;
    }
}

const Ops &ops() {
    static const Ops &table = ops_for(active_backend());
    return table;
}

}  // namespace vidcont::kernels
