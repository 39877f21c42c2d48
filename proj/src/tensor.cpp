#include "pyrad/tensor.hpp"

#include <algorithm>

namespace pyrad {

Tensor::Tensor(Shape shape, bool requires_grad) {
    for (int d : shape) {
        if (d <= 0) throw ConfigError(strf("tensor extent must be positive, got shape ", shape_str(shape)));
    }
    impl_ = std::make_shared<detail::TensorImpl>();
    impl_->shape = std::move(shape);
    impl_->v.assign(static_cast<size_t>(shape_numel(impl_->shape)), 0.0f);
    impl_->requires_grad = requires_grad;
}

Tensor Tensor::zeros(Shape shape) { return Tensor(std::move(shape)); }

Tensor Tensor::full(Shape shape, float value) {
    Tensor t(std::move(shape));
    std::fill(t.impl_->v.begin(), t.impl_->v.end(), value);
    return t;
}

Tensor Tensor::from(Shape shape, std::vector<float> values, bool requires_grad) {
    if (shape_numel(shape) != static_cast<int64_t>(values.size())) {
        throw ConfigError(strf("shape ", shape_str(shape), " does not match ", values.size(), " values"));
    }
    Tensor t(std::move(shape), requires_grad);
    t.impl_->v = std::move(values);
    return t;
}

Tensor Tensor::scalar(float value) { return from({1}, {value}); }

float Tensor::item() const {
    if (numel() != 1) throw UsageError(strf("item() requires a scalar, got shape ", shape_str(shape())));
    return impl_->v[0];
}

Tensor Tensor::clone() const {
    Tensor t;
    t.impl_ = std::make_shared<detail::TensorImpl>();
    t.impl_->shape = impl_->shape;
    t.impl_->v = impl_->v;
    t.impl_->requires_grad = impl_->requires_grad;
    return t;
}

std::span<float> Tensor::grad() {
    if (!has_grad()) throw UsageError("tensor has no gradient; run backward first");
    return impl_->g;
}

std::span<const float> Tensor::grad() const {
    if (!has_grad()) throw UsageError("tensor has no gradient; run backward first");
    return impl_->g;
}

void Tensor::zero_grad() {
    if (!impl_->g.empty()) std::fill(impl_->g.begin(), impl_->g.end(), 0.0f);
}

void Tensor::release_grad() {
    impl_->g.clear();
    impl_->g.shrink_to_fit();
}

} // namespace pyrad
