#pragma once

#include <string>
#include <utility>
#include <vector>

#include "vidcont/nn/tensor.hpp"

namespace vidcont::nn {

// Named trainable parameters of a model, in a stable registration order
// (checkpoint array order follows it).
struct ParamSet {
    std::vector<std::pair<std::string, Tensor>> items;

    void add(const std::string &name, const Tensor &t) { items.emplace_back(name, t); }
    void extend(const ParamSet &other, const std::string &prefix) {
        for (const auto &[n, t] : other.items) items.emplace_back(prefix + n, t);
    }
    int64_t total_size() const {
        int64_t n = 0;
        for (const auto &[name, t] : items) n += t.numel();
        return n;
    }
};

struct AdamConfig {
    float beta1 = 0.9f;
    float beta2 = 0.999f;
    float eps = 1e-8f;
    float weight_decay = 0.0f;  // decoupled
};

class Adam {
public:
    Adam(ParamSet params, AdamConfig cfg = {});

    void zero_grad();
    void step(float lr);

    int64_t step_count() const { return t_; }
    void set_step_count(int64_t t) { t_ = t; }

    const ParamSet &params() const { return params_; }
    // Moment buffers exposed for checkpoint resume.
    std::vector<float> &moment1(size_t i) { return m_[i]; }
    std::vector<float> &moment2(size_t i) { return v_[i]; }

private:
    ParamSet params_;
    AdamConfig cfg_;
    std::vector<std::vector<float>> m_, v_;
    int64_t t_ = 0;
};

// Linear anneal from lr_start to lr_end over total iterations.
inline float linear_lr(float lr_start, float lr_end, int64_t iter, int64_t total) {
    if (total <= 1) return lr_end;
    const float a = static_cast<float>(iter) / static_cast<float>(total - 1);
    const float f = a > 1.0f ? 1.0f : a;
    return lr_start + (lr_end - lr_start) * f;
}

}  // namespace vidcont::nn
