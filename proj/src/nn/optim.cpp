#include "vidcont/nn/optim.hpp"

#include <cmath>

namespace vidcont::nn {

Adam::Adam(ParamSet params, AdamConfig cfg) : params_(std::move(params)), cfg_(cfg) {
    m_.reserve(params_.items.size());
    v_.reserve(params_.items.size());
    for (auto &[name, t] : params_.items) {
        m_.emplace_back(static_cast<size_t>(t.numel()), 0.0f);
        v_.emplace_back(static_cast<size_t>(t.numel()), 0.0f);
    }
}

void Adam::zero_grad() {
    for (auto &[name, t] : params_.items) t.zero_grad();
}

void Adam::step(float lr) {
    ++t_;
    const float b1 = cfg_.beta1, b2 = cfg_.beta2;
    const float bias1 = 1.0f - std::pow(b1, static_cast<float>(t_));
    const float bias2 = 1.0f - std::pow(b2, static_cast<float>(t_));
    for (size_t i = 0; i < params_.items.size(); ++i) {
        Tensor &p = params_.items[i].second;
        const float *g = p.grad();
        float *w = p.data();
        float *m = m_[i].data();
        float *v = v_[i].data();
        const int64_t n = p.numel();
        for (int64_t j = 0; j < n; ++j) {
            m[j] = b1 * m[j] + (1.0f - b1) * g[j];
            v[j] = b2 * v[j] + (1.0f - b2) * g[j] * g[j];
            const float mh = m[j] / bias1;
            const float vh = v[j] / bias2;
            w[j] -= lr * (mh / (std::sqrt(vh) + cfg_.eps) + cfg_.weight_decay * w[j]);
        }
    }
}

}  // namespace vidcont::nn
