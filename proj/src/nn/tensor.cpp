#include "vidcont/nn/tensor.hpp"

#include <cassert>
#include <stdexcept>
#include <unordered_set>

namespace vidcont::nn {

int64_t shape_numel(const Shape &s) {
    int64_t n = 1;
    for (int d : s) n *= d;
    return n;
}

std::string shape_str(const Shape &s) {
    std::string out = "[";
    for (size_t i = 0; i < s.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(s[i]);
    }
    return out + "]";
}

Tensor Tensor::zeros(const Shape &s, bool requires_grad) {
    auto n = std::make_shared<Node>();
    n->shape = s;
    n->data.assign(static_cast<size_t>(shape_numel(s)), 0.0f);
    n->requires_grad = requires_grad;
    return Tensor(std::move(n));
}

Tensor Tensor::full(const Shape &s, float value, bool requires_grad) {
    Tensor t = zeros(s, requires_grad);
    for (auto &v : t.node()->data) v = value;
    return t;
}

Tensor Tensor::from_data(const Shape &s, std::vector<float> values, bool requires_grad) {
    assert(static_cast<int64_t>(values.size()) == shape_numel(s));
    auto n = std::make_shared<Node>();
    n->shape = s;
    n->data = std::move(values);
    n->requires_grad = requires_grad;
    return Tensor(std::move(n));
}

Tensor Tensor::randn(const Shape &s, Rng &rng, float stddev, bool requires_grad) {
    Tensor t = zeros(s, requires_grad);
    for (auto &v : t.node()->data) v = static_cast<float>(rng.gauss()) * stddev;
    return t;
}

Tensor Tensor::uniform(const Shape &s, Rng &rng, float lo, float hi, bool requires_grad) {
    Tensor t = zeros(s, requires_grad);
    for (auto &v : t.node()->data) v = static_cast<float>(rng.uniform(lo, hi));
    return t;
}

float Tensor::item() const {
    if (numel() != 1) throw std::logic_error("item() on non-scalar tensor " + shape_str(shape()));
    return node_->data[0];
}

Tensor Tensor::detach() const {
    auto n = std::make_shared<Node>();
    n->shape = node_->shape;
    n->data = node_->data;
    n->requires_grad = false;
    return Tensor(std::move(n));
}

namespace {
thread_local bool g_grad_enabled = true;
}

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : prev_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = prev_; }

void Tensor::backward() {
    if (numel() != 1) throw std::logic_error("backward() requires a scalar loss");

    // Iterative topological order over the tape.
    std::vector<Node *> order;
    std::unordered_set<Node *> seen;
    std::vector<std::pair<Node *, size_t>> stack;
    stack.emplace_back(node_.get(), 0);
    seen.insert(node_.get());
    while (!stack.empty()) {
        auto &[n, idx] = stack.back();
        if (idx < n->parents.size()) {
            Node *p = n->parents[idx++].get();
            if (p->requires_grad && !seen.count(p)) {
                seen.insert(p);
                stack.emplace_back(p, 0);
            }
        } else {
            order.push_back(n);
            stack.pop_back();
        }
    }

    node_->ensure_grad();
    node_->grad[0] = 1.0f;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Node *n = *it;
        if (n->backward_fn) n->backward_fn();
    }
}

}  // namespace vidcont::nn
