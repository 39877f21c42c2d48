#pragma once

#include <memory>
#include <span>
#include <vector>

#include "pyrad/common.hpp"

namespace pyrad {

class GradGraph;

namespace detail {

struct TensorImpl {
    Shape shape;
    std::vector<float> v;
    std::vector<float> g; // empty means "no grad buffer"
    bool requires_grad = false;

    // Producer bookkeeping, valid while the recording graph is alive.
    GradGraph* graph = nullptr;
    int node = -1;
};

} // namespace detail

// Dense row-major f32 tensor. Handles share storage on copy; clone() makes
// a deep copy. Gradients live next to the values and are filled in by
// GradGraph::backward for requires_grad leaves.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(Shape shape, bool requires_grad = false);

    static Tensor zeros(Shape shape);
    static Tensor full(Shape shape, float value);
    static Tensor from(Shape shape, std::vector<float> values, bool requires_grad = false);
    static Tensor scalar(float value);

    bool defined() const { return impl_ != nullptr; }
    const Shape& shape() const { return impl_->shape; }
    int ndim() const { return static_cast<int>(impl_->shape.size()); }
    int extent(int axis) const { return impl_->shape[static_cast<size_t>(axis)]; }
    int64_t numel() const { return static_cast<int64_t>(impl_->v.size()); }

    float* data() { return impl_->v.data(); }
    const float* data() const { return impl_->v.data(); }
    std::span<float> values() { return impl_->v; }
    std::span<const float> values() const { return impl_->v; }
    float item() const;

    Tensor clone() const;

    bool requires_grad() const { return impl_->requires_grad; }
    void set_requires_grad(bool on) { impl_->requires_grad = on; }

    bool has_grad() const { return defined() && !impl_->g.empty(); }
    std::span<float> grad();
    std::span<const float> grad() const;
    void zero_grad();     // keeps the buffer, zero-fills it if present
    void release_grad();  // drops the buffer

    bool same_storage(const Tensor& other) const { return impl_ == other.impl_; }

    const std::shared_ptr<detail::TensorImpl>& impl() const { return impl_; }

private:
    std::shared_ptr<detail::TensorImpl> impl_;
};

} // namespace pyrad
