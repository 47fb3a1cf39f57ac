#include "vidcont/tokenizer/lfq.hpp"

#include "vidcont/core/errors.hpp"

namespace vidcont::tok {

TokenGrid latent_to_ids(const nn::Tensor &latent) {
    if (latent.ndim() != 3) throw DataError("latent_to_ids expects [K,h,w]");
    const int K = latent.dim(0), h = latent.dim(1), w = latent.dim(2);
    if (K > 31) throw DataError("bits_k above 31 does not fit the token id type");
    const int64_t hw = static_cast<int64_t>(h) * w;
    TokenGrid out(h, w);
    const float *z = latent.data();
    for (int64_t p = 0; p < hw; ++p) {
        int32_t id = 0;
        for (int k = 0; k < K; ++k)
            if (z[k * hw + p] > 0.0f) id |= (1 << k);
        out.ids[static_cast<size_t>(p)] = id;
    }
    return out;
}

nn::Tensor ids_to_codes(const TokenGrid &ids, int bits_k) {
    const int64_t vocab = int64_t{1} << bits_k;
    nn::Tensor codes = nn::Tensor::zeros({bits_k, ids.h, ids.w});
    const int64_t hw = static_cast<int64_t>(ids.h) * ids.w;
    float *d = codes.data();
    for (int64_t p = 0; p < hw; ++p) {
        const int32_t id = ids.ids[static_cast<size_t>(p)];
        if (id < 0 || id >= vocab)
            throw DataError("token id " + std::to_string(id) + " outside vocabulary of " +
                            std::to_string(vocab));
        for (int k = 0; k < bits_k; ++k) d[k * hw + p] = (id >> k) & 1 ? 1.0f : -1.0f;
    }
    return codes;
}

int64_t code_to_index(const std::vector<float> &code) {
    int64_t id = 0;
    for (size_t k = 0; k < code.size(); ++k)
        if (code[k] > 0.0f) id |= (int64_t{1} << k);
    return id;
}

std::vector<float> index_to_code(int64_t index, int bits_k) {
    std::vector<float> code(static_cast<size_t>(bits_k));
    for (int k = 0; k < bits_k; ++k) code[static_cast<size_t>(k)] = (index >> k) & 1 ? 1.0f : -1.0f;
    return code;
}

FactorizedTokens factorize(const TokenGrid &ids, int bits_k) {
    if (bits_k % 2 != 0) throw DataError("factorize requires an even bit count");
    const int32_t sub = 1 << (bits_k / 2);
    const int64_t vocab = int64_t{1} << bits_k;
    FactorizedTokens out(ids.h, ids.w);
    for (size_t p = 0; p < ids.ids.size(); ++p) {
        const int32_t id = ids.ids[p];
        if (id < 0 || id >= vocab)
            throw DataError("token id " + std::to_string(id) + " outside vocabulary of " +
                            std::to_string(vocab));
        out.lo[p] = id % sub;
        out.hi[p] = id / sub;
    }
    return out;
}

TokenGrid defactorize(const FactorizedTokens &ft, int bits_k) {
    if (bits_k % 2 != 0) throw DataError("defactorize requires an even bit count");
    const int32_t sub = 1 << (bits_k / 2);
    TokenGrid out(ft.h, ft.w);
    for (size_t p = 0; p < ft.lo.size(); ++p) {
        const int32_t lo = ft.lo[p], hi = ft.hi[p];
        if (lo < 0 || lo >= sub || hi < 0 || hi >= sub)
            throw DataError("sub-token (" + std::to_string(lo) + "," + std::to_string(hi) +
                            ") outside sub-vocabulary of " + std::to_string(sub));
        out.ids[p] = hi * sub + lo;
    }
    return out;
}

}  // namespace vidcont::tok
