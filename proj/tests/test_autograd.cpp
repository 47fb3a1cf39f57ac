#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>
#include <vector>

#include "vidcont/nn/ops.hpp"
#include "vidcont/nn/optim.hpp"
#include "vidcont/nn/tensor.hpp"

using namespace vidcont;
using namespace vidcont::nn;

namespace {

// Central-difference check of dL/dx against the tape, on a sample of indices.
void gradcheck(Tensor &x, const std::function<Tensor()> &make_loss, double tol = 2e-2,
               float h = 5e-3f, int max_indices = 24) {
    x.zero_grad();
    Tensor loss = make_loss();
    loss.backward();
    std::vector<float> analytic(x.grad(), x.grad() + x.numel());

    Rng rng(1234);
    const int64_t n = x.numel();
    const int count = static_cast<int>(std::min<int64_t>(n, max_indices));
    for (int s = 0; s < count; ++s) {
        const int64_t i = (n <= max_indices) ? s : static_cast<int64_t>(rng.below(n));
        const float orig = x.data()[i];
        double fp, fm;
        {
            NoGradGuard ng;
            x.data()[i] = orig + h;
            fp = make_loss().item();
            x.data()[i] = orig - h;
            fm = make_loss().item();
            x.data()[i] = orig;
        }
        const double numeric = (fp - fm) / (2.0 * h);
        const double got = analytic[static_cast<size_t>(i)];
        const double err = std::abs(numeric - got);
        const double scale = std::max({1.0, std::abs(numeric), std::abs(got)});
        INFO("index ", i, " numeric ", numeric, " analytic ", got);
        CHECK(err / scale <= tol);
    }
}

Tensor rand_t(const Shape &s, uint64_t seed, float scale = 1.0f, bool rg = true) {
    Rng rng(seed);
    return Tensor::randn(s, rng, scale, rg);
}

}  // namespace

TEST_CASE("elementwise op gradients") {
    Tensor a = rand_t({4, 5}, 1);
    Tensor b = rand_t({4, 5}, 2);
    gradcheck(a, [&] { return mean_all(mul(add(a, b), sub(a, b))); });
    gradcheck(b, [&] { return mean_all(mul(add(a, b), sub(a, b))); });

    Tensor x = rand_t({3, 7}, 3);
    gradcheck(x, [&] { return mean_all(silu(x)); });
    gradcheck(x, [&] { return mean_all(sigmoid(x)); });
    gradcheck(x, [&] { return mean_all(tanh_act(x)); });
    gradcheck(x, [&] { return mean_all(affine(x, 1.7f, -0.3f)); });

    Tensor p = Tensor::zeros({20}, true);
    Rng rng(4);
    for (int i = 0; i < 20; ++i) p.data()[i] = static_cast<float>(rng.uniform(0.05, 0.95));
    gradcheck(p, [&] { return mean_all(xlogx(p)); });
}

TEST_CASE("matmul / linear / bias gradients") {
    Tensor a = rand_t({3, 4}, 10);
    Tensor b = rand_t({4, 5}, 11);
    gradcheck(a, [&] { return mean_all(matmul(a, b)); });
    gradcheck(b, [&] { return mean_all(matmul(a, b)); });

    Tensor x = rand_t({6, 8}, 12);
    Tensor w = rand_t({5, 8}, 13);
    Tensor bias = rand_t({5}, 14);
    gradcheck(x, [&] { return mean_all(silu(linear_bias(x, w, bias))); });
    gradcheck(w, [&] { return mean_all(silu(linear_bias(x, w, bias))); });
    gradcheck(bias, [&] { return mean_all(silu(linear_bias(x, w, bias))); });
}

TEST_CASE("reduction and reshape gradients") {
    Tensor x = rand_t({5, 6}, 20);
    gradcheck(x, [&] { return sum_all(mul(mean_rows(x), mean_rows(x))); });
    gradcheck(x, [&] { return mean_all(reshape(x, {2, 15})); });

    Tensor y = rand_t({2, 3, 4, 4}, 21);
    gradcheck(y, [&] { return mean_all(mul(nchw_to_cells(y), nchw_to_cells(y))); });
    Tensor cells = rand_t({2 * 16, 3}, 22);
    gradcheck(cells, [&] {
        Tensor t = cells_to_nchw(cells, 2, 4, 4);
        return mean_all(mul(t, t));
    });
}

TEST_CASE("conv2d gradients (stride 1 and 2, with bias)") {
    Tensor x = rand_t({2, 3, 6, 6}, 30);
    Tensor w = rand_t({4, 3, 3, 3}, 31, 0.5f);
    Tensor b = rand_t({4}, 32);
    for (int stride : {1, 2}) {
        auto loss = [&] { return mean_all(mul(conv2d(x, w, b, stride, 1), conv2d(x, w, b, stride, 1))); };
        gradcheck(x, loss);
        gradcheck(w, loss);
        gradcheck(b, loss);
    }
}

TEST_CASE("upsample / concat gradients") {
    Tensor x = rand_t({1, 2, 3, 3}, 40);
    gradcheck(x, [&] { return mean_all(mul(upsample_nearest2(x), upsample_nearest2(x))); });

    Tensor a = rand_t({2, 2, 3, 3}, 41);
    Tensor b = rand_t({2, 3, 3, 3}, 42);
    gradcheck(a, [&] { return mean_all(mul(concat_channels(a, b), concat_channels(a, b))); });
    gradcheck(b, [&] { return mean_all(mul(concat_channels(a, b), concat_channels(a, b))); });
}

TEST_CASE("normalization gradients") {
    Tensor x = rand_t({2, 4, 3, 3}, 50);
    Tensor gamma = rand_t({4}, 51, 0.5f);
    Tensor beta = rand_t({4}, 52, 0.5f);
    for (int groups : {1, 2, 4}) {
        auto loss = [&] { return mean_all(silu(group_norm(x, gamma, beta, groups))); };
        gradcheck(x, loss, 3e-2);
        gradcheck(gamma, loss);
        gradcheck(beta, loss);
    }

    Tensor t = rand_t({5, 8}, 53);
    Tensor g2 = rand_t({8}, 54, 0.5f);
    gradcheck(t, [&] { return mean_all(silu(rms_norm(t, g2))); }, 3e-2);
    gradcheck(g2, [&] { return mean_all(silu(rms_norm(t, g2))); });
}

TEST_CASE("embedding / rope / attention gradients") {
    Tensor table = rand_t({11, 8}, 60);
    std::vector<int> ids = {3, 1, 4, 1, 5, 9, 2, 6};
    gradcheck(table, [&] { return mean_all(mul(embedding(table, ids), embedding(table, ids))); });

    Tensor x = rand_t({5, 8}, 61);
    gradcheck(x, [&] { return mean_all(mul(rope(x, 2, 3), rope(x, 2, 3))); });

    Tensor q = rand_t({6, 8}, 62);
    Tensor k = rand_t({6, 8}, 63);
    Tensor v = rand_t({6, 8}, 64);
    auto attn_loss = [&] {
        Tensor o = attention_causal(rope(q, 2), rope(k, 2), v, 2);
        return mean_all(mul(o, o));
    };
    gradcheck(q, attn_loss, 3e-2);
    gradcheck(k, attn_loss, 3e-2);
    gradcheck(v, attn_loss, 3e-2);
}

TEST_CASE("loss gradients") {
    Tensor logits = rand_t({7, 9}, 70);
    std::vector<int> targets = {1, 0, 8, 3, 3, 7, 2};
    std::vector<uint8_t> mask = {1, 1, 0, 1, 1, 0, 1};
    gradcheck(logits, [&] { return cross_entropy(logits, targets, mask); });

    Tensor a = rand_t({4, 4}, 71);
    Tensor b = rand_t({4, 4}, 72);
    gradcheck(a, [&] { return mse_loss(a, b); });
    gradcheck(b, [&] { return mse_loss(a, b); });
    gradcheck(a, [&] { return l1_loss(a, b); });
}

TEST_CASE("straight-through sign passes gradients unchanged") {
    Tensor z = rand_t({3, 4}, 80);
    Tensor up = rand_t({3, 4}, 81, 1.0f, false);
    z.zero_grad();
    Tensor q = ste_sign(z);
    // loss = sum(q * up) so dL/dq = up exactly; STE must hand that to z.
    Tensor loss = sum_all(mul(q, up));
    loss.backward();
    for (int64_t i = 0; i < z.numel(); ++i) REQUIRE(z.grad()[i] == up.data()[i]);
    // forward values are exactly +-1 with the z==0 tie mapping to -1
    Tensor zero = Tensor::zeros({2}, false);
    Tensor qz = ste_sign(zero);
    CHECK(qz.data()[0] == -1.0f);
}

TEST_CASE("bilinear warp gradients (features and flow)") {
    Tensor feat = rand_t({2, 5, 5}, 90);
    Tensor flow = Tensor::zeros({2, 5, 5}, true);
    Rng rng(91);
    // keep displacements interior so the clamp boundary does not make the
    // numeric derivative one-sided
    for (int64_t i = 0; i < flow.numel(); ++i)
        flow.data()[i] = static_cast<float>(rng.uniform(-1.2, 1.2));
    auto loss = [&] {
        Tensor o = bilinear_warp(feat, flow);
        return mean_all(mul(o, o));
    };
    gradcheck(feat, loss, 3e-2);
    gradcheck(flow, loss, 4e-2, 2e-3f);
}

TEST_CASE("adam reduces a quadratic") {
    Tensor w = rand_t({16}, 100);
    Tensor target = rand_t({16}, 101, 1.0f, false);
    ParamSet ps;
    ps.add("w", w);
    Adam opt(ps, {});
    double first = 0.0, last = 0.0;
    for (int it = 0; it < 200; ++it) {
        opt.zero_grad();
        Tensor loss = mse_loss(w, target);
        loss.backward();
        opt.step(0.05f);
        if (it == 0) first = loss.item();
        last = loss.item();
    }
    CHECK(last < first * 1e-3);
}
