#include "pyrad/autograd.hpp"

#include <algorithm>

namespace pyrad {

namespace detail {

std::vector<float>& grad_buf(TensorImpl& t) {
    if (t.g.empty()) t.g.assign(t.v.size(), 0.0f);
    return t.g;
}

} // namespace detail

GradGraph::~GradGraph() { unlink_outputs(); }

void GradGraph::unlink_outputs() {
    for (auto& n : nodes_) {
        if (n.output && n.output->graph == this) {
            n.output->graph = nullptr;
            n.output->node = -1;
        }
    }
}

void GradGraph::reset() {
    unlink_outputs();
    nodes_.clear();
    used_ = false;
}

bool GradGraph::wants(std::initializer_list<const Tensor*> inputs) const {
    for (const Tensor* t : inputs) {
        if (!t->defined()) continue;
        const auto& impl = *t->impl();
        if (impl.requires_grad) return true;
        if (impl.graph == this && impl.node >= 0) return true;
    }
    return false;
}

void GradGraph::record(const char* op, std::initializer_list<const Tensor*> inputs, const Tensor& output,
                       std::function<void()> backward_fn) {
    Node n;
    n.op = op;
    n.inputs.reserve(inputs.size());
    for (const Tensor* t : inputs) n.inputs.push_back(t->impl());
    n.output = output.impl();
    n.backward_fn = std::move(backward_fn);
    n.output->graph = this;
    n.output->node = static_cast<int>(nodes_.size());
    nodes_.push_back(std::move(n));
}

void GradGraph::backward(const Tensor& loss) {
    if (used_) throw UsageError("backward already ran on this graph; record a fresh forward pass first");
    if (!loss.defined() || loss.numel() != 1) {
        throw UsageError(strf("backward requires a scalar loss, got shape ",
                              loss.defined() ? shape_str(loss.shape()) : std::string("<undefined>")));
    }
    auto& li = *loss.impl();
    if (li.graph != this || li.node < 0) {
        throw UsageError("backward on a tensor detached from this graph");
    }
    used_ = true;

    detail::grad_buf(li).assign(1, 1.0f);

    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
        if (it->output->g.empty()) continue; // never reached from the loss
        it->backward_fn();
    }

    // Contract: every requires_grad leaf that entered the graph ends up with
    // a populated (possibly zero) grad; intermediate buffers are dropped.
    for (auto& n : nodes_) {
        for (auto& in : n.inputs) {
            if (in->requires_grad && in->g.empty()) detail::grad_buf(*in);
        }
    }
    for (auto& n : nodes_) {
        if (!n.output->requires_grad) {
            n.output->g.clear();
            n.output->g.shrink_to_fit();
        }
    }
    unlink_outputs();
}

Tensor finite_difference(const std::function<float(const Tensor&)>& f, const Tensor& x, float h) {
    if (h <= 0.0f) throw UsageError("finite_difference needs h > 0");
    Tensor probe = x.clone();
    probe.set_requires_grad(false);
    Tensor out(x.shape());
    float* p = probe.data();
    const float* base = x.data();
    float* o = out.data();
    const int64_t n = x.numel();
    for (int64_t i = 0; i < n; ++i) {
        p[i] = base[i] + h;
        const double fp = f(probe);
        p[i] = base[i] - h;
        const double fm = f(probe);
        p[i] = base[i];
        o[i] = static_cast<float>((fp - fm) / (2.0 * static_cast<double>(h)));
    }
    return out;
}

} // namespace pyrad
