#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

namespace vidcont {

inline uint64_t splitmix64(uint64_t &state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Deterministic PRNG (xoshiro256++) used everywhere instead of <random>
// distributions, which are not bit-stable across standard libraries.
class Rng {
public:
    explicit Rng(uint64_t seed = 0) { reseed(seed); }

    void reseed(uint64_t seed) {
        uint64_t sm = seed;
        for (auto &w : s_) w = splitmix64(sm);
        has_gauss_ = false;
        gauss_spare_ = 0.0;
    }

    uint64_t next_u64() {
        const uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n); n must be > 0.
    uint64_t below(uint64_t n) {
        // Rejection sampling keeps the draw unbiased.
        const uint64_t threshold = (0ULL - n) % n;
        for (;;) {
            const uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

    int range_int(int lo, int hi_inclusive) {
        return lo + static_cast<int>(below(static_cast<uint64_t>(hi_inclusive - lo + 1)));
    }

    bool bernoulli(double p) { return uniform() < p; }

    // Box-Muller with a cached spare.
    double gauss() {
        if (has_gauss_) {
            has_gauss_ = false;
            return gauss_spare_;
        }
        double u1 = 0.0;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        gauss_spare_ = r * std::sin(a);
        has_gauss_ = true;
        return r * std::cos(a);
    }

    double gauss(double mu, double sigma) { return mu + sigma * gauss(); }

    template <class T>
    void shuffle(std::vector<T> &v) {
        for (size_t i = v.size(); i > 1; --i) {
            const size_t j = static_cast<size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    uint64_t s_[4] = {};
    bool has_gauss_ = false;
    double gauss_spare_ = 0.0;
};

// Stable per-(seed, stream, index) derived seed so training stages can make
// every stochastic choice a pure function of (global seed, iteration).
inline uint64_t derive_seed(uint64_t seed, uint64_t stream, uint64_t index = 0) {
    uint64_t s = seed ^ (0x517cc1b727220a95ULL * (stream + 1));
    s ^= splitmix64(s) + index * 0x2545f4914f6cdd1dULL;
    return splitmix64(s);
}

}  // namespace vidcont
