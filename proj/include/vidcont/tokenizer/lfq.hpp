#pragma once

#include <cstdint>
#include <vector>

#include "vidcont/nn/tensor.hpp"

namespace vidcont::tok {

// Spatial grid of K-bit integer codes.
struct TokenGrid {
    int h = 0, w = 0;
    std::vector<int32_t> ids;

    TokenGrid() = default;
    TokenGrid(int h_, int w_) : h(h_), w(w_), ids(static_cast<size_t>(h_) * w_, 0) {}
    int32_t &at(int y, int x) { return ids[static_cast<size_t>(y) * w + x]; }
    int32_t at(int y, int x) const { return ids[static_cast<size_t>(y) * w + x]; }
    bool operator==(const TokenGrid &o) const { return h == o.h && w == o.w && ids == o.ids; }
};

// Two sub-tokens per cell, each in [0, 2^(K/2)).
struct FactorizedTokens {
    int h = 0, w = 0;
    std::vector<int32_t> lo, hi;

    FactorizedTokens() = default;
    FactorizedTokens(int h_, int w_)
        : h(h_), w(w_), lo(static_cast<size_t>(h_) * w_, 0), hi(static_cast<size_t>(h_) * w_, 0) {}
    bool operator==(const FactorizedTokens &o) const {
        return h == o.h && w == o.w && lo == o.lo && hi == o.hi;
    }
};

// Lookup-free quantization over latent channels. Bit i of a cell's code is 1
// iff channel i of the latent is > 0 (ties quantize to 0); codes read the
// channels LSB-first. The code vector has +1 where the bit is 1, -1 elsewhere.

// latent [K,h,w] -> token ids
TokenGrid latent_to_ids(const nn::Tensor &latent);
// token ids -> code vectors [K,h,w] of +-1 entries; validates id range
nn::Tensor ids_to_codes(const TokenGrid &ids, int bits_k);

// single-code helpers (exhaustive bijection tests use these)
int64_t code_to_index(const std::vector<float> &code);
std::vector<float> index_to_code(int64_t index, int bits_k);

FactorizedTokens factorize(const TokenGrid &ids, int bits_k);
TokenGrid defactorize(const FactorizedTokens &ft, int bits_k);

}  // namespace vidcont::tok
