#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "vidcont/core/rng.hpp"

namespace vidcont::nn {

using Shape = std::vector<int>;

int64_t shape_numel(const Shape &s);
std::string shape_str(const Shape &s);

// One graph node: owns its value buffer, its (lazily allocated) gradient and
// the closure that pushes gradients to its parents.
struct Node {
    Shape shape;
    std::vector<float> data;
    std::vector<float> grad;
    bool requires_grad = false;
    std::vector<std::shared_ptr<Node>> parents;
    std::function<void()> backward_fn;

    int64_t numel() const { return static_cast<int64_t>(data.size()); }
    void ensure_grad() {
        if (grad.size() != data.size()) grad.assign(data.size(), 0.0f);
    }
};

// Value-semantics handle over a shared node (define-by-run tape).
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::shared_ptr<Node> n) : node_(std::move(n)) {}

    static Tensor zeros(const Shape &s, bool requires_grad = false);
    static Tensor full(const Shape &s, float value, bool requires_grad = false);
    static Tensor from_data(const Shape &s, std::vector<float> values, bool requires_grad = false);
    static Tensor randn(const Shape &s, Rng &rng, float stddev, bool requires_grad = false);
    static Tensor uniform(const Shape &s, Rng &rng, float lo, float hi, bool requires_grad = false);

    bool defined() const { return node_ != nullptr; }
    const Shape &shape() const { return node_->shape; }
    int dim(int i) const { return node_->shape[static_cast<size_t>(i)]; }
    int ndim() const { return static_cast<int>(node_->shape.size()); }
    int64_t numel() const { return node_->numel(); }

    float *data() { return node_->data.data(); }
    const float *data() const { return node_->data.data(); }
    std::vector<float> &vec() { return node_->data; }
    const std::vector<float> &vec() const { return node_->data; }

    bool requires_grad() const { return node_->requires_grad; }
    void set_requires_grad(bool rg) { node_->requires_grad = rg; }
    float *grad() {
        node_->ensure_grad();
        return node_->grad.data();
    }
    void zero_grad() {
        if (!node_->grad.empty()) node_->grad.assign(node_->data.size(), 0.0f);
    }

    float item() const;

    // Reverse-mode sweep from a scalar.
    void backward();

    // Leaf copy sharing no graph history.
    Tensor detach() const;

    std::shared_ptr<Node> &node() { return node_; }
    const std::shared_ptr<Node> &node() const { return node_; }

private:
    std::shared_ptr<Node> node_;
};

bool grad_enabled();

// RAII guard to run a region without building the tape (inference).
struct NoGradGuard {
    NoGradGuard();
    ~NoGradGuard();
    NoGradGuard(const NoGradGuard &) = delete;
    NoGradGuard &operator=(const NoGradGuard &) = delete;

private:
    bool prev_;
};

}  // namespace vidcont::nn
