#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>
#include <cmath>
#include <vector>

#include "vidcont/core/rng.hpp"
#include "vidcont/kernels/kernels.hpp"

using namespace vidcont;
namespace kn = vidcont::kernels;

namespace {

std::vector<float> random_vec(size_t n, Rng &rng, float scale = 1.0f) {
    std::vector<float> v(n);
    for (auto &x : v) x = static_cast<float>(rng.uniform(-1.0, 1.0)) * scale;
    return v;
}

void check_close(const std::vector<float> &a, const std::vector<float> &b, double tol) {
    REQUIRE(a.size() == b.size());
    double max_err = 0.0, max_mag = 1.0;
    for (size_t i = 0; i < a.size(); ++i) {
        max_err = std::max(max_err, std::abs(static_cast<double>(a[i]) - b[i]));
        max_mag = std::max(max_mag, std::abs(static_cast<double>(a[i])));
    }
    CHECK(max_err / max_mag <= tol);
}

}  // namespace

TEST_CASE("backend detection reports something sane") {
    const kn::Backend b = kn::active_backend();
    CHECK((b == kn::Backend::scalar || b == kn::Backend::avx2 || b == kn::Backend::neon));
    MESSAGE("active backend: ", std::string(kn::backend_name(b)));
}

TEST_CASE("gemm variants match the scalar reference") {
    Rng rng(7);
    const kn::Ops &active = kn::ops();
    // shapes chosen to exercise tails: not multiples of 8/16
    const int shapes[][3] = {{1, 1, 1},   {3, 5, 7},    {16, 16, 16}, {17, 33, 9},
                             {64, 40, 30}, {5, 127, 200}, {33, 16, 257}};
    for (auto &s : shapes) {
        const int M = s[0], N = s[1], K = s[2];
        auto A = random_vec(static_cast<size_t>(M) * K, rng);
        auto B = random_vec(static_cast<size_t>(K) * N, rng);
        auto Bt = random_vec(static_cast<size_t>(N) * K, rng);
        auto At = random_vec(static_cast<size_t>(K) * M, rng);
        auto C0 = random_vec(static_cast<size_t>(M) * N, rng);

        for (bool acc : {false, true}) {
            auto c_ref = C0, c_act = C0;
            kn::scalar::gemm_nn(M, N, K, A.data(), K, B.data(), N, c_ref.data(), N, acc);
            active.gemm_nn(M, N, K, A.data(), K, B.data(), N, c_act.data(), N, acc);
            check_close(c_ref, c_act, 1e-4);

            c_ref = C0;
            c_act = C0;
            kn::scalar::gemm_nt(M, N, K, A.data(), K, Bt.data(), K, c_ref.data(), N, acc);
            active.gemm_nt(M, N, K, A.data(), K, Bt.data(), K, c_act.data(), N, acc);
            check_close(c_ref, c_act, 1e-4);

            c_ref = C0;
            c_act = C0;
            kn::scalar::gemm_tn(M, N, K, At.data(), M, B.data(), N, c_ref.data(), N, acc);
            active.gemm_tn(M, N, K, At.data(), M, B.data(), N, c_act.data(), N, acc);
            check_close(c_ref, c_act, 1e-4);
        }
    }
}

TEST_CASE("gemm row results are independent of the row count") {
    // The incremental decoding path computes single rows of the same products
    // the full forward computes in bulk; the two must agree bit for bit.
    Rng rng(11);
    const int M = 37, N = 29, K = 53;
    auto A = random_vec(static_cast<size_t>(M) * K, rng);
    auto B = random_vec(static_cast<size_t>(K) * N, rng);
    auto Bt = random_vec(static_cast<size_t>(N) * K, rng);
    std::vector<float> full(static_cast<size_t>(M) * N), one(N);

    kn::gemm_nn(M, N, K, A.data(), K, B.data(), N, full.data(), N, false);
    for (int i = 0; i < M; ++i) {
        kn::gemm_nn(1, N, K, A.data() + static_cast<size_t>(i) * K, K, B.data(), N, one.data(), N,
                    false);
        for (int j = 0; j < N; ++j) REQUIRE(one[j] == full[static_cast<size_t>(i) * N + j]);
    }

    kn::gemm_nt(M, N, K, A.data(), K, Bt.data(), K, full.data(), N, false);
    for (int i = 0; i < M; ++i) {
        kn::gemm_nt(1, N, K, A.data() + static_cast<size_t>(i) * K, K, Bt.data(), K, one.data(), N,
                    false);
        for (int j = 0; j < N; ++j) REQUIRE(one[j] == full[static_cast<size_t>(i) * N + j]);
    }
}

TEST_CASE("vector kernels match the scalar reference") {
    Rng rng(3);
    for (int64_t n : {1, 7, 8, 9, 31, 32, 100, 1023}) {
        auto x = random_vec(static_cast<size_t>(n), rng);
        auto y = random_vec(static_cast<size_t>(n), rng);
        const kn::Ops &active = kn::ops();

        auto y1 = y, y2 = y;
        kn::scalar::vec_add(y1.data(), x.data(), n);
        active.vec_add(y2.data(), x.data(), n);
        check_close(y1, y2, 1e-6);

        y1 = y;
        y2 = y;
        kn::scalar::vec_axpy(y1.data(), 0.37f, x.data(), n);
        active.vec_axpy(y2.data(), 0.37f, x.data(), n);
        check_close(y1, y2, 1e-6);

        y1 = y;
        y2 = y;
        kn::scalar::vec_mul(y1.data(), x.data(), n);
        active.vec_mul(y2.data(), x.data(), n);
        check_close(y1, y2, 1e-6);

        CHECK(std::abs(kn::scalar::vec_sum(x.data(), n) - active.vec_sum(x.data(), n)) <=
              1e-4 * (1.0 + std::abs(kn::scalar::vec_sum(x.data(), n))));
        CHECK(std::abs(kn::scalar::vec_dot(x.data(), y.data(), n) -
                       active.vec_dot(x.data(), y.data(), n)) <= 1e-4);
        CHECK(kn::scalar::vec_max(x.data(), n) == active.vec_max(x.data(), n));
    }
}

TEST_CASE("sad_u8 variants agree exactly") {
    Rng rng(5);
    for (int n : {1, 15, 16, 31, 32, 33, 64, 193, 1000}) {
        std::vector<uint8_t> a(static_cast<size_t>(n)), b(static_cast<size_t>(n));
        for (auto &v : a) v = static_cast<uint8_t>(rng.below(256));
        for (auto &v : b) v = static_cast<uint8_t>(rng.below(256));
        CHECK(kn::scalar::sad_u8(a.data(), b.data(), n) == kn::sad_u8(a.data(), b.data(), n));
    }
}

TEST_CASE("explicit backend tables are callable") {
    // Equivalence across the table for one representative op.
    Rng rng(9);
    const int M = 9, N = 17, K = 21;
    auto A = random_vec(static_cast<size_t>(M) * K, rng);
    auto B = random_vec(static_cast<size_t>(K) * N, rng);
    std::vector<float> c_ref(static_cast<size_t>(M) * N), c(static_cast<size_t>(M) * N);
    kn::ops_for(kn::Backend::scalar).gemm_nn(M, N, K, A.data(), K, B.data(), N, c_ref.data(), N, false);
    for (kn::Backend b : {kn::Backend::scalar, kn::Backend::avx2, kn::Backend::neon}) {
        kn::ops_for(b).gemm_nn(M, N, K, A.data(), K, B.data(), N, c.data(), N, false);
        check_close(c_ref, c, 1e-4);
    }
}

TEST_CASE("gemm throughput (informational)") {
    Rng rng(1);
    const int M = 256, N = 256, K = 256;
    auto A = random_vec(static_cast<size_t>(M) * K, rng);
    auto B = random_vec(static_cast<size_t>(K) * N, rng);
    std::vector<float> C(static_cast<size_t>(M) * N);
    const auto t0 = std::chrono::steady_clock::now();
    const int reps = 20;
    for (int r = 0; r < reps; ++r)
        kn::gemm_nn(M, N, K, A.data(), K, B.data(), N, C.data(), N, false);
    const auto t1 = std::chrono::steady_clock::now();
    const double secs = std::chrono::duration<double>(t1 - t0).count();
    const double gflops = 2.0 * M * N * K * reps / secs / 1e9;
    MESSAGE("gemm_nn 256^3: ", gflops, " GFLOP/s on ", std::string(kn::backend_name(kn::active_backend())));
    CHECK(gflops > 0.05);
}
